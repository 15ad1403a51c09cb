#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace admit {

using Vec2 = Eigen::Vector2d;
using Row2 = Eigen::RowVector2d;
using Mat2 = Eigen::Matrix2d;

/// Eigen-decomposition of a symmetric 2x2 matrix, values ascending.
/// Columns of `vectors` are the matching orthonormal eigenvectors.
struct SymmetricEigen2
{
  Vec2 values;
  Mat2 vectors;
};

/// Closed-form symmetric eigen-decomposition by a single Jacobi rotation.
/// Only the symmetric part of `S` is used.
SymmetricEigen2 symmetric_eigen(const Mat2& S);

inline double min_eigenvalue(const Mat2& S)
{
  return symmetric_eigen(S).values(0);
}
inline double max_eigenvalue(const Mat2& S)
{
  return symmetric_eigen(S).values(1);
}

/// Eigenvalues of a general 2x2 matrix from its characteristic polynomial.
std::array<std::complex<double>, 2> eigenvalues(const Mat2& A);

/// True when both eigenvalues of A have strictly negative real part.
/// For 2x2 this is trace < 0 and det > 0.
bool is_hurwitz(const Mat2& A);

inline Mat2 symmetrize(const Mat2& S)
{
  return 0.5 * (S + S.transpose());
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m)
{
  return m.allFinite();
}

}  // namespace admit
