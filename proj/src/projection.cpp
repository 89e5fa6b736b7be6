#include "psc/projection.hpp"

#include <limits>

#include "psc/errors.hpp"

namespace psc {

namespace {

void require_compatible(const Embedding& alpha, const StiefelPoint& y) {
  if (alpha.rows() != y.rows()) {
    throw ShapeMismatch("embedding has " + std::to_string(alpha.rows()) +
                        " rows but point has " + std::to_string(y.rows()));
  }
  if (alpha.cols() < y.cols()) {
    throw ShapeMismatch("embedding dimension n must be at least k");
  }
}

ProjectionOutcome project_unchecked(const Embedding& alpha,
                                    const StiefelPoint& y, double tol) {
  ProjectionOutcome out;
  const Matrix a = alpha.matrix().transpose() * y.matrix();
  Matrix y_hat;
  if (a.cols() == 1) {
    out.sigma_min = a.norm();
    out.in_domain = out.sigma_min > tol;
    if (out.in_domain) y_hat = a / out.sigma_min;
  } else {
    const SvdFactors f = svd_thin(a);
    out.sigma_min = f.singular_values(f.singular_values.size() - 1);
    out.in_domain = out.sigma_min > tol;
    if (out.in_domain) y_hat = f.u * f.v.transpose();
  }
  if (!out.in_domain) {
    out.residual = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  Matrix projected = alpha.matrix() * y_hat;
  out.residual = (y.matrix() - projected).norm();
  out.y_hat.emplace(std::move(y_hat));
  out.projected.emplace(std::move(projected));
  return out;
}

}  // namespace

DomainCheck domain_check(const Embedding& alpha, const StiefelPoint& y,
                         double tol) {
  require_compatible(alpha, y);
  const RankTest r = rank_is_full(alpha.matrix().transpose() * y.matrix(), tol);
  return {r.full, r.sigma_min};
}

ProjectionOutcome project(const Embedding& alpha, const StiefelPoint& y,
                          double tol) {
  require_compatible(alpha, y);
  ProjectionOutcome out = project_unchecked(alpha, y, tol);
  if (!out.in_domain) throw DomainError(out.sigma_min);
  return out;
}

std::vector<ProjectionOutcome> project_batch(const Embedding& alpha,
                                             const FrameDataset& data,
                                             double tol) {
  std::vector<ProjectionOutcome> out;
  out.reserve(data.size());
  for (const StiefelPoint& y : data.points()) {
    require_compatible(alpha, y);
    out.push_back(project_unchecked(alpha, y, tol));
  }
  return out;
}

}  // namespace psc
