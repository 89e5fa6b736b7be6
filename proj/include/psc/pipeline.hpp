#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psc/fit.hpp"

namespace psc {

struct FitOptions {
  GdConfig gd;
  /// RANSAC screening before the PCA warm start; off unless set.
  std::optional<RansacConfig> ransac;
  PcaVariant pca_variant = PcaVariant::kEig;
  double rank_tol = kRankTolerance;
  /// Recorded in the report.
  std::uint64_t seed = 0;
};

enum class WarningKind {
  kRemoval,       ///< some points left the projection domain
  kLargeRemoval,  ///< more than 10% of the input was removed
  kPcaTie,
  kGdBudget,
};

struct FitWarning {
  WarningKind kind;
  std::string message;
};

struct FitReport {
  Eigen::Index ambient_dim = 0;
  Eigen::Index frame_size = 0;
  Eigen::Index target_dim = 0;
  std::size_t input_count = 0;

  Embedding alpha_pca;
  Embedding alpha_gd;
  double cost_pca = 0.0;
  double cost_gd = 0.0;
  CostTrace cost_trace;
  GdStatus gd_status = GdStatus::kGradientTolerance;

  std::vector<std::size_t> removed_ransac;
  std::vector<std::size_t> removed_pca;  ///< outside the domain of alpha_pca
  std::vector<std::size_t> removed_gd;   ///< outside the domain of alpha_gd
  std::vector<std::size_t> survivors;    ///< input indices, ascending
  /// One outcome per survivor, same order.
  std::vector<ProjectionOutcome> outcomes;
  double mse = 0.0;

  FitOptions options;
  std::vector<FitWarning> warnings;
  /// Wall-clock time of the fit. Not serialized.
  double elapsed_seconds = 0.0;

  bool has_removals() const {
    return !removed_ransac.empty() || !removed_pca.empty() ||
           !removed_gd.empty();
  }
};

/// Principal Stiefel Coordinates: optional RANSAC, PCA warm start, domain
/// screen, gradient ascent, second domain screen, final projection.
/// Throws InvalidArgument when n is out of range and EmptySurvivors when
/// every point is removed.
FitReport psc_fit(const FrameDataset& data, Eigen::Index n,
                  const FitOptions& options = {});

/// The n x k coordinates y_hat of every surviving point, in survivor order.
FrameDataset recover_low_dim(const FitReport& report);

/// A k-dimensional subspace of R^N, compared through its projector.
class GrassmannPoint {
 public:
  explicit GrassmannPoint(StiefelPoint basis) : basis_(std::move(basis)) {}

  const StiefelPoint& basis() const { return basis_; }
  Matrix projector() const;
  /// Projector distance ||p1 p1^T - p2 p2^T||_F.
  double distance(const GrassmannPoint& other) const;
  bool equals(const GrassmannPoint& other, double tol = 1e-8) const {
    return distance(other) <= tol;
  }

 private:
  StiefelPoint basis_;
};

struct GrassmannReduction {
  std::vector<GrassmannPoint> reduced;  ///< in Gr(k, R^n), one per survivor
  FitReport report;
};

/// Lifts each subspace to the leading singular vectors of its projector,
/// runs psc_fit and maps the coordinates back to Grassmann classes. The
/// result does not depend on the bases the input points carry.
GrassmannReduction grassmann_reduce(const std::vector<GrassmannPoint>& data,
                                    Eigen::Index n,
                                    const FitOptions& options = {});

}  // namespace psc
