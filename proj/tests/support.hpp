#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// avoid the library's own factorizations wherever that is practical.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <string>

#include "psc/linalg.hpp"
#include "psc/random.hpp"
#include "psc/stiefel.hpp"

namespace psc::testing {

inline constexpr double kPi = std::numbers::pi;

/// Random matrix with entries uniform in [-1, 1].
inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

/// Orthonormal columns by modified Gram-Schmidt, independent of the SVD path.
inline Matrix gram_schmidt(Matrix a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      a.col(j) -= a.col(i).dot(a.col(j)) * a.col(i);
    }
    a.col(j).normalize();
  }
  return a;
}

/// Number of singular values above tol, via Eigen's Jacobi SVD.
inline Eigen::Index jacobi_rank(const Matrix& a, double tol) {
  Eigen::JacobiSVD<Matrix> svd(a);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++r;
  }
  return r;
}

/// sum_i sqrt(lambda_i(a^T a)) from a symmetric eigendecomposition.
inline double nuclear_norm_by_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    s += std::sqrt(std::max(0.0, eig.eigenvalues()(i)));
  }
  return s;
}

/// min over `samples` equally spaced angles of ||y - alpha (cos t, sin t)^T||.
/// alpha is N x 2, y is N x 1.
inline double circle_brute_force_residual(const Matrix& alpha, const Matrix& y,
                                          int samples) {
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double t = 2.0 * kPi * s / samples;
    const Vector x = (Vector(2) << std::cos(t), std::sin(t)).finished();
    best = std::min(best, (y - alpha * x).norm());
  }
  return best;
}

/// Angle t minimizing sum_i ||(cos t, sin t) - p_i||^2 over a uniform grid.
inline double circle_brute_force_mean_angle(const FrameDataset& points,
                                            int samples) {
  double best = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double t = 2.0 * kPi * s / samples;
    const Vector x = (Vector(2) << std::cos(t), std::sin(t)).finished();
    double total = 0.0;
    for (const StiefelPoint& p : points.points()) {
      total += (p.matrix().col(0) - x).squaredNorm();
    }
    if (total < best) {
      best = total;
      best_t = t;
    }
  }
  return best_t;
}

/// Smallest angle between two directions on the circle.
inline double angle_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

/// Fresh directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("psc-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace psc::testing
