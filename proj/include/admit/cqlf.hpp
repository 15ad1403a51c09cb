#pragma once

#include "admit/linalg.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace admit {

/// Common quadratic Lyapunov certificate for a family of 2x2 subsystems.
///
/// `margins[i]` is the largest eigenvalue of A_i^T P + P A_i (negative for a
/// valid certificate). `q_matrices[i] = -(A_i^T P + P A_i)` is the matrix for
/// which the Lyapunov equality holds with the common P; a certificate proves
/// each of them positive definite.
struct CqlfCertificate
{
  Mat2 P = Mat2::Identity();
  double p_min_eigenvalue = 0.0;
  std::vector<double> margins;
  std::vector<Mat2> q_matrices;
  int iterations = 0;  // 0 when P was supplied rather than searched
};

struct CqlfRejection
{
  /// Failing subsystem, or `npos` when P itself is not positive definite.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t subsystem = npos;
  double eigenvalue = 0.0;
  std::string reason;
};

struct InfeasibleReport
{
  Mat2 best_P = Mat2::Identity();
  std::vector<double> best_margins;
  double best_p_min_eigenvalue = 0.0;
  int iterations = 0;
};

using VerifyResult = std::variant<CqlfCertificate, CqlfRejection>;
using SearchResult = std::variant<CqlfCertificate, InfeasibleReport>;

/// Strictness floor used by the search projections.
inline constexpr double kCqlfStrictness = 1e-3;

/// P = [8.16 2.22; 2.22 3.90], the default common Lyapunov matrix.
Mat2 default_lyapunov_matrix();

/// Solves A^T P + P A + Q = 0 for symmetric P through the 3-unknown linear
/// system on (p11, p12, p22). Throws AdmitError(not_hurwitz) if A is not
/// Hurwitz, the system is singular, or the solution is not positive definite.
Mat2 solve_lyapunov(const Mat2& A, const Mat2& Q);

/// A^T P + P A.
inline Mat2 lyapunov_sum(const Mat2& A, const Mat2& P)
{
  return A.transpose() * P + P * A;
}

VerifyResult verify_cqlf(const std::vector<Mat2>& subsystems, const Mat2& P);

/// Alternating projections onto {P : A_i^T P + P A_i <= -eps I} (eigenvalue
/// clipping in the image of the Lyapunov operator) and {P >= eps I}, started
/// from the mean of the per-subsystem solutions with Q = I. Stops once every
/// margin is <= -tol and min eig(P) >= tol, or after max_iter sweeps.
SearchResult search_cqlf(const std::vector<Mat2>& subsystems, int max_iter = 500, double tol = 1e-9);

/// Structured text block: P, its smallest eigenvalue, per-subsystem margins and Q_i.
std::string format_certificate(const CqlfCertificate& cert);
std::string format_rejection(const CqlfRejection& rejection);
std::string format_infeasible(const InfeasibleReport& report);

}  // namespace admit
