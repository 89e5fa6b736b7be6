#pragma once

#include <optional>
#include <vector>

#include "psc/stiefel.hpp"

namespace psc {

struct DomainCheck {
  bool in_domain = false;
  /// Smallest singular value of alpha^T y.
  double sigma_min = 0.0;
};

/// Result of the closest-point projection of one frame onto im(alpha).
///
/// When in_domain is false the projection is undefined: y_hat and projected
/// are empty and residual is NaN.
struct ProjectionOutcome {
  std::optional<StiefelPoint> y_hat;      ///< n x k coordinates
  std::optional<StiefelPoint> projected;  ///< alpha * y_hat, N x k
  double residual = 0.0;                  ///< ||y - alpha y_hat||_F
  bool in_domain = false;
  double sigma_min = 0.0;
};

/// rank(alpha^T y) == k, judged on sigma_min > tol.
DomainCheck domain_check(const Embedding& alpha, const StiefelPoint& y,
                         double tol = kRankTolerance);

/// y_hat = polar factor of alpha^T y; throws DomainError outside the domain.
ProjectionOutcome project(const Embedding& alpha, const StiefelPoint& y,
                          double tol = kRankTolerance);

/// Per-point projection; out-of-domain points are flagged, never repaired.
std::vector<ProjectionOutcome> project_batch(const Embedding& alpha,
                                             const FrameDataset& data,
                                             double tol = kRankTolerance);

}  // namespace psc
