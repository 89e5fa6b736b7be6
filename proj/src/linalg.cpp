#include "psc/linalg.hpp"

#include <cmath>

#include "psc/errors.hpp"
#include "psc/random.hpp"

namespace psc {

namespace {

// Jacobi is more accurate on the small blocks that dominate this code base;
// divide-and-conquer takes over for wide concatenations.
constexpr Eigen::Index kJacobiMaxDim = 32;

void require_valid(const Matrix& a) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw InvalidArgument("matrix must have at least one row and column");
  }
  if (!all_finite(a)) throw InvalidArgument("matrix has non-finite entries");
}

}  // namespace

bool all_finite(const Matrix& a) { return a.allFinite(); }

SvdFactors svd_thin(const Matrix& a) {
  require_valid(a);
  SvdFactors out;
  if (std::min(a.rows(), a.cols()) <= kJacobiMaxDim) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
      throw NumericalFailure(a.rows(), a.cols());
    }
    out.u = svd.matrixU();
    out.singular_values = svd.singularValues();
    out.v = svd.matrixV();
  } else {
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
      throw NumericalFailure(a.rows(), a.cols());
    }
    out.u = svd.matrixU();
    out.singular_values = svd.singularValues();
    out.v = svd.matrixV();
  }
  if (!out.singular_values.allFinite()) {
    throw NumericalFailure(a.rows(), a.cols());
  }
  return out;
}

PolarFactors polar_decompose(const Matrix& a, double tol) {
  require_valid(a);
  if (a.rows() < a.cols()) {
    throw InvalidArgument("polar decomposition needs rows >= cols");
  }
  PolarFactors out;
  if (a.cols() == 1) {
    const double norm = a.norm();
    if (!(norm > tol)) throw RankDeficiency(norm);
    out.u = a / norm;
    out.h = Matrix::Constant(1, 1, norm);
    return out;
  }
  const SvdFactors f = svd_thin(a);
  const double sigma_min = f.singular_values(f.singular_values.size() - 1);
  if (!(sigma_min > tol)) throw RankDeficiency(sigma_min);
  out.u = f.u * f.v.transpose();
  out.h = f.v * f.singular_values.asDiagonal() * f.v.transpose();
  out.h = sym(out.h);
  return out;
}

Matrix polar_factor(const Matrix& a, double tol) {
  require_valid(a);
  if (a.rows() < a.cols()) {
    throw InvalidArgument("polar decomposition needs rows >= cols");
  }
  if (a.cols() == 1) {
    const double norm = a.norm();
    if (!(norm > tol)) throw RankDeficiency(norm);
    return a / norm;
  }
  const SvdFactors f = svd_thin(a);
  const double sigma_min = f.singular_values(f.singular_values.size() - 1);
  if (!(sigma_min > tol)) throw RankDeficiency(sigma_min);
  return f.u * f.v.transpose();
}

RankTest rank_is_full(const Matrix& a, double tol) {
  RankTest out;
  if (a.rows() < a.cols()) return out;
  const SvdFactors f = svd_thin(a);
  out.sigma_min = f.singular_values(f.singular_values.size() - 1);
  out.full = out.sigma_min > tol;
  return out;
}

bool rank_is_full_det(const Matrix& a, double tol) {
  if (a.rows() < a.cols()) return false;
  const Matrix gram = a.transpose() * a;
  return gram.determinant() > std::pow(tol, static_cast<double>(a.cols()));
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::uint64_t seed) {
  if (rows < 1 || cols < 1) {
    throw InvalidArgument("gaussian_matrix needs positive dimensions");
  }
  Rng rng(seed);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  }
  return out;
}

Matrix skew(const Matrix& m) { return 0.5 * (m - m.transpose()); }

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double nuclear_norm(const Matrix& a) {
  if (a.cols() == 1 || a.rows() == 1) return a.norm();
  return svd_thin(a).singular_values.sum();
}

}  // namespace psc
