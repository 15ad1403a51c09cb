#include "admit/error.hpp"
#include "admit/trace_io.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace admit;

TEST(TraceCsv, HeaderLayout)
{
  const auto cols = trace_columns(2);
  ASSERT_EQ(cols.size(), 9u + 2u * (5u + 4u + 1u) + 7u);
  EXPECT_EQ(cols.front(), "t_s");
  EXPECT_EQ(cols[9], "delta1_x_m");
  EXPECT_EQ(cols.back(), "det_j");
  EXPECT_NE(std::find(cols.begin(), cols.end(), "kx2_y_1"), cols.end());
}

TEST(TraceCsv, RoundTripThroughReader)
{
  ScenarioConfig c = paper_scenario();
  c.duration = 0.5;
  const ScenarioResult r = run_scenario(c);
  std::stringstream ss;
  write_trace_csv(ss, r.trace);
  const CsvTable table = read_csv(ss);
  ASSERT_EQ(table.rows.size(), r.trace.rows.size());
  const std::size_t t = table.column("t_s"), y = table.column("delta1_y_m"), region = table.column("region_x"),
                    k = table.column("kx1_x_2"), tau = table.column("tau1_nm");
  for (std::size_t i = 0; i < table.rows.size(); i += 50)
  {
    const TraceRecord& rec = r.trace.rows[i];
    EXPECT_NEAR(table.rows[i][t], rec.t, 1e-12);
    EXPECT_NEAR(table.rows[i][y], rec.axes[1].delta(0), 1e-9 * (1 + std::abs(rec.axes[1].delta(0))));
    EXPECT_EQ(table.rows[i][region], 1.0);
    EXPECT_NEAR(table.rows[i][k], rec.axes[0].k_x[0](1), 1e-8 * 9);
    EXPECT_NEAR(table.rows[i][tau], rec.torque(0), 1e-8 * (1 + std::abs(rec.torque(0))));
  }
  EXPECT_THROW(table.column("nope"), AdmitError);
}

TEST(TraceCsv, ReaderRejectsMalformedRows)
{
  std::stringstream bad("a,b\n1,2\n3,x\n");
  EXPECT_THROW(read_csv(bad), AdmitError);
  std::stringstream short_row("a,b\n1\n");
  EXPECT_THROW(read_csv(short_row), AdmitError);
}

TEST(Outputs, WritesAllFilesAndParseableMetrics)
{
  oracle::TempDir dir("admit_outputs");
  ScenarioConfig c = paper_scenario();
  c.duration = 0.2;
  const ScenarioResult r = run_scenario(c);
  write_run_outputs(dir.path(), c, r);
  for (const char* f : {"trace.csv", "metrics.json", "metrics.txt", "certificate.txt"})
    EXPECT_TRUE(std::filesystem::exists(dir.path() / f)) << f;
  std::ifstream in(dir.path() / "metrics.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["scenario"], "paper_scenario");
  EXPECT_EQ(j["completed"], true);
  EXPECT_EQ(j["steps"], 201);
  EXPECT_TRUE(j["audit"]["passed"].get<bool>());
  EXPECT_NE(metrics_text(r, c.name).find("max_abs_delta1_x_m: "), std::string::npos);
}

TEST(Outputs, AbortIsRecorded)
{
  ScenarioConfig c = paper_scenario();
  c.q0 = Vec2(0.2, 0.0);
  const ScenarioResult r = run_scenario(c);
  const auto j = nlohmann::json::parse(metrics_json(r, c.name));
  EXPECT_EQ(j["completed"], false);
  EXPECT_EQ(j["abort"]["error"], "invalid_config");
  EXPECT_NE(j["abort"]["detail"].get<std::string>().find("singular"), std::string::npos);
  EXPECT_EQ(j["abort"]["step"], 0);
}
