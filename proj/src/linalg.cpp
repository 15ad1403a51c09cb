#include "admit/linalg.hpp"

#include "admit/error.hpp"

#include <cmath>
#include <utility>

namespace admit {

SymmetricEigen2 symmetric_eigen(const Mat2& S)
{
  const double a = S(0, 0);
  const double b = 0.5 * (S(0, 1) + S(1, 0));
  const double c = S(1, 1);

  // Rotation angle that annihilates the off-diagonal entry.
  const double theta = 0.5 * std::atan2(2.0 * b, a - c);
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);

  double l1 = a * cs * cs + 2.0 * b * sn * cs + c * sn * sn;
  double l2 = a * sn * sn - 2.0 * b * sn * cs + c * cs * cs;
  Vec2 v1(cs, sn);
  Vec2 v2(-sn, cs);
  if (l2 < l1)
  {
    std::swap(l1, l2);
    std::swap(v1, v2);
  }

  SymmetricEigen2 out;
  out.values << l1, l2;
  out.vectors.col(0) = v1;
  out.vectors.col(1) = v2;
  return out;
}

std::array<std::complex<double>, 2> eigenvalues(const Mat2& A)
{
  const double half_trace = 0.5 * A.trace();
  const double det = A.determinant();
  const double disc = half_trace * half_trace - det;
  if (disc >= 0.0)
  {
    const double root = std::sqrt(disc);
    // Stable ordering: the root with larger magnitude first avoids cancellation.
    const double big = half_trace >= 0.0 ? half_trace + root : half_trace - root;
    const double small = big != 0.0 ? det / big : 0.0;
    if (big <= small) return {std::complex<double>(big), std::complex<double>(small)};
    return {std::complex<double>(small), std::complex<double>(big)};
  }
  const double imag = std::sqrt(-disc);
  return {std::complex<double>(half_trace, -imag), std::complex<double>(half_trace, imag)};
}

bool is_hurwitz(const Mat2& A)
{
  return A.allFinite() && A.trace() < 0.0 && A.determinant() > 0.0;
}

std::string_view to_string(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::singular:
      return "singular";
    case ErrorKind::nonfinite_state:
      return "nonfinite_state";
    case ErrorKind::not_hurwitz:
      return "not_hurwitz";
    case ErrorKind::no_cqlf:
      return "no_cqlf";
    case ErrorKind::uncovered_state:
      return "uncovered_state";
    case ErrorKind::unmatchable:
      return "unmatchable";
    case ErrorKind::invalid_config:
      return "invalid_config";
    case ErrorKind::parse_error:
      return "parse_error";
    case ErrorKind::io_error:
      return "io_error";
  }
  return "unknown";
}

}  // namespace admit
