#include "admit/cqlf.hpp"

#include "admit/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace admit {

Mat2 default_lyapunov_matrix()
{
  Mat2 P;
  P << 8.16, 2.22, 2.22, 3.90;
  return P;
}

namespace {

// Symmetric solution of A^T P + P A = -Q, no definiteness check.
// Unknowns (p11, p12, p22); the operator's determinant is 4 tr(A) det(A).
bool solve_lyapunov_unchecked(const Mat2& A, const Mat2& Q, Mat2& P)
{
  const double a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
  Eigen::Matrix3d L;
  L << 2.0 * a, 2.0 * c, 0.0, b, a + d, c, 0.0, 2.0 * b, 2.0 * d;
  const Eigen::Vector3d rhs(-Q(0, 0), -0.5 * (Q(0, 1) + Q(1, 0)), -Q(1, 1));
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), 1e-300});
  if (std::abs(L.determinant()) <= 1e-14 * scale * scale * scale) return false;
  const Eigen::Vector3d p = L.fullPivLu().solve(rhs);
  if (!p.allFinite()) return false;
  P << p(0), p(1), p(1), p(2);
  return true;
}

std::vector<double> margins_of(const std::vector<Mat2>& family, const Mat2& P)
{
  std::vector<double> m;
  m.reserve(family.size());
  for (const auto& A : family) m.push_back(max_eigenvalue(lyapunov_sum(A, P)));
  return m;
}

CqlfCertificate make_certificate(const std::vector<Mat2>& family, const Mat2& P, int iterations)
{
  CqlfCertificate cert;
  cert.P = P;
  cert.p_min_eigenvalue = min_eigenvalue(P);
  cert.iterations = iterations;
  for (const auto& A : family)
  {
    const Mat2 sum = symmetrize(lyapunov_sum(A, P));
    cert.margins.push_back(max_eigenvalue(sum));
    cert.q_matrices.push_back(-sum);
  }
  return cert;
}

Mat2 clip_eigenvalues(const Mat2& S, double lo, double hi)
{
  const SymmetricEigen2 e = symmetric_eigen(S);
  Vec2 v = e.values;
  for (int i = 0; i < 2; ++i) v(i) = std::clamp(v(i), lo, hi);
  return symmetrize(e.vectors * v.asDiagonal() * e.vectors.transpose());
}

void require_hurwitz_family(const std::vector<Mat2>& family)
{
  if (family.empty()) throw AdmitError(ErrorKind::invalid_config, "CQLF: empty subsystem family");
  for (std::size_t i = 0; i < family.size(); ++i)
  {
    if (!is_hurwitz(family[i]))
    {
      std::ostringstream os;
      os << "CQLF: subsystem " << i + 1 << " is not Hurwitz";
      throw AdmitError(ErrorKind::not_hurwitz, os.str());
    }
  }
}

}  // namespace

Mat2 solve_lyapunov(const Mat2& A, const Mat2& Q)
{
  if (!is_hurwitz(A)) throw AdmitError(ErrorKind::not_hurwitz, "Lyapunov solve: A is not Hurwitz");
  Mat2 P;
  if (!solve_lyapunov_unchecked(A, Q, P))
    throw AdmitError(ErrorKind::not_hurwitz, "Lyapunov solve: singular Lyapunov operator");
  if (min_eigenvalue(P) <= 0.0)
    throw AdmitError(ErrorKind::not_hurwitz, "Lyapunov solve: solution is not positive definite");
  return P;
}

VerifyResult verify_cqlf(const std::vector<Mat2>& family, const Mat2& P)
{
  CqlfRejection rej;
  if (!P.allFinite() || (P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff()))
  {
    rej.reason = "P is not symmetric";
    return rej;
  }
  const double p_min = min_eigenvalue(P);
  if (!(p_min > 0.0))
  {
    rej.eigenvalue = p_min;
    rej.reason = "P is not positive definite";
    return rej;
  }
  for (std::size_t i = 0; i < family.size(); ++i)
  {
    const double m = max_eigenvalue(lyapunov_sum(family[i], P));
    if (!(m < 0.0))
    {
      rej.subsystem = i;
      rej.eigenvalue = m;
      rej.reason = "A^T P + P A is not negative definite";
      return rej;
    }
  }
  return make_certificate(family, P, 0);
}

SearchResult search_cqlf(const std::vector<Mat2>& family, int max_iter, double tol)
{
  require_hurwitz_family(family);
  const double eps = kCqlfStrictness;

  Mat2 P = Mat2::Zero();
  for (const auto& A : family) P += solve_lyapunov(A, Mat2::Identity());
  P /= static_cast<double>(family.size());

  InfeasibleReport best;
  double best_score = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= std::max(1, max_iter); ++iter)
  {
    const std::vector<double> m = margins_of(family, P);
    const double p_min = min_eigenvalue(P);
    const double worst = *std::max_element(m.begin(), m.end());
    if (worst <= -tol && p_min >= tol) return make_certificate(family, P, iter);

    // Compare scale-free: margins relative to the size of P.
    const double score = worst / std::max(P.trace(), 1e-300);
    if (score < best_score)
    {
      best_score = score;
      best.best_P = P;
      best.best_margins = m;
      best.best_p_min_eigenvalue = p_min;
    }
    best.iterations = iter;

    for (const auto& A : family)
    {
      const Mat2 L = symmetrize(lyapunov_sum(A, P));
      if (max_eigenvalue(L) <= -eps) continue;
      Mat2 next;
      if (solve_lyapunov_unchecked(A, -clip_eigenvalues(L, -std::numeric_limits<double>::infinity(), -eps), next))
        P = symmetrize(next);
    }
    P = clip_eigenvalues(P, eps, std::numeric_limits<double>::infinity());
  }
  return best;
}

namespace {

void put_matrix(std::ostream& os, const Mat2& M)
{
  os << "[[" << M(0, 0) << ", " << M(0, 1) << "], [" << M(1, 0) << ", " << M(1, 1) << "]]";
}

}  // namespace

std::string format_certificate(const CqlfCertificate& cert)
{
  std::ostringstream os;
  os << std::setprecision(9);
  os << "cqlf_certificate:\n";
  os << "  status: issued\n";
  os << "  P: ";
  put_matrix(os, cert.P);
  os << "\n  P_min_eigenvalue: " << cert.p_min_eigenvalue << "\n";
  os << "  search_iterations: " << cert.iterations << "\n";
  for (std::size_t i = 0; i < cert.margins.size(); ++i)
  {
    os << "  subsystem_" << i + 1 << ":\n";
    os << "    margin_max_eigenvalue: " << cert.margins[i] << "\n";
    os << "    Q: ";
    put_matrix(os, cert.q_matrices[i]);
    os << "\n";
  }
  return os.str();
}

std::string format_rejection(const CqlfRejection& r)
{
  std::ostringstream os;
  os << std::setprecision(9);
  os << "cqlf_certificate:\n  status: rejected\n  reason: " << r.reason << "\n";
  if (r.subsystem != CqlfRejection::npos) os << "  subsystem: " << r.subsystem + 1 << "\n";
  os << "  offending_eigenvalue: " << r.eigenvalue << "\n";
  return os.str();
}

std::string format_infeasible(const InfeasibleReport& r)
{
  std::ostringstream os;
  os << std::setprecision(9);
  os << "cqlf_certificate:\n  status: infeasible\n  iterations: " << r.iterations << "\n  best_P: ";
  put_matrix(os, r.best_P);
  os << "\n  best_P_min_eigenvalue: " << r.best_p_min_eigenvalue << "\n";
  for (std::size_t i = 0; i < r.best_margins.size(); ++i)
    os << "  subsystem_" << i + 1 << "_best_margin: " << r.best_margins[i] << "\n";
  return os.str();
}

}  // namespace admit
