#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace psc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Absolute tolerance on the smallest singular value below which a matrix is
/// treated as rank deficient. Shared by every rank test in the pipeline.
inline constexpr double kRankTolerance = 1e-10;

/// Thin SVD a = u * diag(singular_values) * v^T with r = min(rows, cols).
/// Singular values are nonincreasing; column signs of u and v are not
/// normalized.
struct SvdFactors {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

/// a = u * h with u orthonormal-column and h symmetric positive semidefinite.
struct PolarFactors {
  Matrix u;
  Matrix h;
};

struct RankTest {
  bool full = false;
  /// The cols-th singular value (zero when rows < cols).
  double sigma_min = 0.0;
};

bool all_finite(const Matrix& a);

/// Throws InvalidArgument on empty or non-finite input and NumericalFailure
/// if the iteration does not converge.
SvdFactors svd_thin(const Matrix& a);

/// Polar factor computed from the thin SVD a = P S Q^T as u = P Q^T,
/// h = Q S Q^T. Requires rows >= cols and sigma_min(a) > tol, otherwise
/// throws RankDeficiency.
PolarFactors polar_decompose(const Matrix& a, double tol = kRankTolerance);

/// Only the orthonormal factor; skips forming h.
Matrix polar_factor(const Matrix& a, double tol = kRankTolerance);

/// Column-rank test on the smallest singular value. Authoritative form.
RankTest rank_is_full(const Matrix& a, double tol = kRankTolerance);

/// det(a^T a) > tol^cols. Cheaper on tall inputs since it never factors a
/// itself; kept alongside the SVD form for benchmarking.
bool rank_is_full_det(const Matrix& a, double tol = kRankTolerance);

/// I.i.d. standard normal entries filled in row-major order from a generator
/// seeded with `seed`. Same seed, same matrix, bit for bit.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::uint64_t seed);

/// (m - m^T) / 2
Matrix skew(const Matrix& m);
Matrix sym(const Matrix& m);

/// Sum of singular values.
double nuclear_norm(const Matrix& a);

}  // namespace psc
