#include "admit/cli/figures.hpp"

#include "admit/error.hpp"

#include <cstdio>
#include <fstream>

namespace admit::cli {

namespace {

class CsvWriter
{
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path), out_(path)
  {
    if (!out_) throw AdmitError(ErrorKind::io_error, "cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values)
  {
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i)
    {
      std::snprintf(buf, sizeof buf, "%.9g", values[i]);
      out_ << (i ? "," : "") << buf;
    }
    out_ << '\n';
  }

  void close()
  {
    out_.close();
    if (!out_) throw AdmitError(ErrorKind::io_error, "write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_text(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path);
  if (!out) throw AdmitError(ErrorKind::io_error, "cannot open " + path.string() + " for writing");
  out << text;
}

std::string script_head(const std::string& stem, const std::string& title)
{
  return "set datafile separator ','\n"
         "set terminal pngcairo size 1000,600\n"
         "set output '" +
         stem + ".png'\n" + "set title '" + title + "'\n" + "set grid\n";
}

}  // namespace

std::vector<std::string> figure_files()
{
  return {"fig1_reference.csv", "fig1_reference.gp", "fig2_gains.csv", "fig2_gains.gp",
          "fig3_xy.csv",        "fig3_xy.gp",        "fig4_torque.csv", "fig4_torque.gp"};
}

void write_figures(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw AdmitError(ErrorKind::io_error, "cannot create " + dir.string() + ": " + ec.message());

  const auto& rows = result.trace.rows;
  const double threshold = config.switching_threshold();
  const double limit = config.safety_limit;
  const std::size_t regions = result.trace.regions;

  {
    CsvWriter csv(dir / "fig1_reference.csv", {"t_s", "delta_m1_x_m", "delta_m1_y_m", "delta1_x_m", "delta1_y_m",
                                               "region_x", "region_y", "threshold_m", "limit_m"});
    for (const auto& r : rows)
      csv.row({r.t, r.axes[0].delta_m(0), r.axes[1].delta_m(0), r.axes[0].delta(0), r.axes[1].delta(0),
               static_cast<double>(r.axes[0].region + 1), static_cast<double>(r.axes[1].region + 1), threshold, limit});
    csv.close();
    write_text(dir / "fig1_reference.gp", script_head("fig1_reference", "Admittance output") +
                                              "set xlabel 't [s]'\nset ylabel 'deviation [m]'\n"
                                              "plot 'fig1_reference.csv' skip 1 using 1:2 with lines title 'x', \\\n"
                                              "     '' skip 1 using 1:3 with lines title 'y', \\\n"
                                              "     '' skip 1 using 1:9 with lines dt 2 lc 'red' title 'limit', \\\n"
                                              "     '' skip 1 using 1:(-$9) with lines dt 2 lc 'red' notitle\n");
  }

  {
    std::vector<std::string> header = {"t_s"};
    for (const char* axis : {"x", "y"})
      for (std::size_t i = 1; i <= regions; ++i)
        for (int c = 1; c <= 2; ++c)
          header.push_back("kx" + std::to_string(i) + "_" + axis + "_" + std::to_string(c));
    CsvWriter csv(dir / "fig2_gains.csv", header);
    std::vector<double> values;
    for (const auto& r : rows)
    {
      values.assign(1, r.t);
      for (const auto& ax : r.axes)
        for (std::size_t i = 0; i < regions; ++i)
        {
          values.push_back(ax.k_x[i](0));
          values.push_back(ax.k_x[i](1));
        }
      csv.row(values);
    }
    csv.close();
    std::string plot = "set xlabel 't [s]'\nset ylabel 'gain'\nplot ";
    for (std::size_t c = 2; c <= header.size(); ++c)
      plot += std::string(c == 2 ? "'fig2_gains.csv'" : "     ''") + " skip 1 using 1:" + std::to_string(c) +
              " with lines title '" + header[c - 1] + "'" + (c < header.size() ? ", \\\n" : "\n");
    write_text(dir / "fig2_gains.gp", script_head("fig2_gains", "Adaptive gains") + "set key noenhanced\n" + plot);
  }

  {
    CsvWriter csv(dir / "fig3_xy.csv", {"series", "x_m", "y_m"});
    for (const auto& r : rows) csv.row({0.0, r.x_dev(0), r.x_dev(1)});
    const double corners[5][2] = {{-limit, -limit}, {limit, -limit}, {limit, limit}, {-limit, limit}, {-limit, -limit}};
    for (const auto& c : corners) csv.row({1.0, c[0], c[1]});
    csv.close();
    write_text(dir / "fig3_xy.gp", script_head("fig3_xy", "End-effector path (deviation frame)") +
                                       "set size ratio -1\nset xlabel 'x [m]'\nset ylabel 'y [m]'\n"
                                       "plot 'fig3_xy.csv' skip 1 using ($1 == 0 ? $2 : 1/0):3 with lines "
                                       "title 'end effector', \\\n"
                                       "     '' skip 1 using ($1 == 1 ? $2 : 1/0):3 with lines lc 'red' "
                                       "title 'safety square'\n");
  }

  {
    CsvWriter csv(dir / "fig4_torque.csv", {"t_s", "tau1_nm", "tau2_nm"});
    for (const auto& r : rows) csv.row({r.t, r.torque(0), r.torque(1)});
    csv.close();
    write_text(dir / "fig4_torque.gp", script_head("fig4_torque", "Joint torques") +
                                           "set xlabel 't [s]'\nset ylabel 'torque [N m]'\n"
                                           "plot 'fig4_torque.csv' skip 1 using 1:2 with lines title 'tau_1', \\\n"
                                           "     '' skip 1 using 1:3 with lines title 'tau_2'\n");
  }
}

}  // namespace admit::cli
