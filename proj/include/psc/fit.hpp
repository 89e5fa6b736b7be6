#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psc/projection.hpp"
#include "psc/stiefel.hpp"

namespace psc {

/// Armijo gradient ascent settings.
struct GdConfig {
  int max_iters = 1000;
  double grad_tol = 1e-6;  ///< on the Frobenius norm of the Riemannian gradient
  double initial_step = 1.0;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  double min_step = 1e-12;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct RansacConfig {
  double keep_fraction = 0.99;
  double outlier_threshold = 3.0;  ///< in standard deviations
  /// A residual must also exceed the subsample mean by this much to be
  /// flagged, so rounding-level spread on exact data flags nothing.
  double residual_floor = 1e-9;
  int max_rounds = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CostTraceEntry {
  int iteration = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  ///< accepted step size, 0 for the initial entry
};

using CostTrace = std::vector<CostTraceEntry>;

enum class GdStatus { kGradientTolerance, kStepTolerance, kIterationBudget };

const char* to_string(GdStatus status);

struct GdResult {
  Embedding alpha;
  CostTrace trace;
  GdStatus status;
};

enum class PcaVariant { kEig, kConcatSvd };

struct AlphaPca {
  Embedding alpha;
  /// Set when eigenvalues n and n+1 are tied; any basis of the tied space
  /// yields the same cost.
  std::optional<std::string> warning;
  /// Eigenvalues of the frame second-moment matrix, nonincreasing.
  Vector spectrum;
};

struct RansacResult {
  Embedding alpha;
  std::vector<std::size_t> kept;     ///< indices into the input dataset
  std::vector<std::size_t> removed;  ///< complement of kept, ascending
  int rounds = 0;
  /// False when max_rounds ran out before a round flagged nothing.
  bool converged = false;
};

/// Mean nuclear norm (1/|Y|) sum ||alpha^T y||_*, bounded above by k.
double cost(const Embedding& alpha, const FrameDataset& data);

/// (I - alpha alpha^T) (1/|Y|) sum y y_hat^T. Throws DomainError when any
/// point is outside the projection domain.
TangentVector riemannian_gradient(const Embedding& alpha,
                                  const FrameDataset& data,
                                  double tol = kRankTolerance);

/// Top-n eigenvectors of (1/|Y|) sum y y^T, or equivalently top-n left
/// singular vectors of the horizontal concatenation of the frames.
AlphaPca alpha_pca(const FrameDataset& data, Eigen::Index n,
                   PcaVariant variant = PcaVariant::kEig);

/// Iterated subsample / fit / flag loop. A point is flagged when its residual
/// exceeds mean + threshold * std over the subsample, or when it falls
/// outside the projection domain (see RansacConfig::residual_floor). Throws EmptySurvivors if nothing is left.
RansacResult ransac_init(const FrameDataset& data, Eigen::Index n,
                         const RansacConfig& config,
                         double tol = kRankTolerance);

/// Armijo backtracking ascent of cost() along the Riemannian gradient with
/// the polar retraction. Candidate steps that push any point out of the
/// projection domain are shrunk like any other rejected step.
GdResult gradient_ascent(const FrameDataset& data, const Embedding& init,
                         const GdConfig& config = {},
                         double tol = kRankTolerance);

}  // namespace psc
