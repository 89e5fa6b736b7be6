#include "psc/pipeline.hpp"

#include <chrono>
#include <numeric>

#include "psc/errors.hpp"

namespace psc {

namespace {

// Keeps the indices whose point lies in the domain of alpha and returns the
// ones that do not.
std::vector<std::size_t> screen_domain(const FrameDataset& data,
                                       std::vector<std::size_t>& indices,
                                       const Embedding& alpha, double tol) {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;
  for (std::size_t i : indices) {
    if (domain_check(alpha, data[i], tol).in_domain) {
      kept.push_back(i);
    } else {
      removed.push_back(i);
    }
  }
  indices = std::move(kept);
  return removed;
}

void note_removal(std::vector<FitWarning>& warnings, const char* stage,
                  std::size_t count) {
  if (count == 0) return;
  warnings.push_back({WarningKind::kRemoval,
                      std::to_string(count) + " point(s) removed at " + stage});
}

}  // namespace

FitReport psc_fit(const FrameDataset& data, Eigen::Index n,
                  const FitOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index big_n = data.ambient_dim();
  const Eigen::Index k = data.frame_size();
  if (n < k || n > big_n) {
    throw InvalidArgument("target dimension n must satisfy k <= n <= N (k = " +
                          std::to_string(k) + ", N = " + std::to_string(big_n) +
                          ", n = " + std::to_string(n) + ")");
  }
  if (data.empty()) throw EmptySurvivors("dataset is empty");
  options.gd.validate();
  const double tol = options.rank_tol;

  std::vector<std::size_t> survivors(data.size());
  std::iota(survivors.begin(), survivors.end(), std::size_t{0});
  std::vector<FitWarning> warnings;

  // Warm start.
  std::vector<std::size_t> removed_ransac;
  std::optional<Embedding> warm;
  if (options.ransac) {
    const RansacResult r = ransac_init(data, n, *options.ransac, tol);
    warm = r.alpha;
    survivors = r.kept;
    removed_ransac = r.removed;
    note_removal(warnings, "RANSAC screening", removed_ransac.size());
  } else {
    AlphaPca pca = alpha_pca(data, n, options.pca_variant);
    if (pca.warning) warnings.push_back({WarningKind::kPcaTie, *pca.warning});
    warm = std::move(pca.alpha);
  }

  std::vector<std::size_t> removed_pca =
      screen_domain(data, survivors, *warm, tol);
  note_removal(warnings, "the alpha_PCA domain screen", removed_pca.size());
  if (survivors.empty()) {
    throw EmptySurvivors("no point lies in the domain of alpha_PCA");
  }

  const FrameDataset kept = data.subset(survivors);
  GdResult gd = gradient_ascent(kept, *warm, options.gd, tol);
  if (gd.status == GdStatus::kIterationBudget) {
    warnings.push_back({WarningKind::kGdBudget,
                        "gradient ascent stopped at the iteration budget"});
  }

  std::vector<std::size_t> removed_gd =
      screen_domain(data, survivors, gd.alpha, tol);
  note_removal(warnings, "the alpha_GD domain screen", removed_gd.size());
  if (survivors.empty()) {
    throw EmptySurvivors("no point lies in the domain of alpha_GD");
  }

  FitReport report{
      .ambient_dim = big_n,
      .frame_size = k,
      .target_dim = n,
      .input_count = data.size(),
      .alpha_pca = *warm,
      .alpha_gd = gd.alpha,
      .cost_pca = gd.trace.front().cost,
      .cost_gd = gd.trace.back().cost,
      .cost_trace = std::move(gd.trace),
      .gd_status = gd.status,
      .removed_ransac = std::move(removed_ransac),
      .removed_pca = std::move(removed_pca),
      .removed_gd = std::move(removed_gd),
      .survivors = survivors,
      .outcomes = {},
      .mse = 0.0,
      .options = options,
      .warnings = {},
      .elapsed_seconds = 0.0,
  };
  const FrameDataset final_set = data.subset(survivors);
  report.outcomes = project_batch(report.alpha_gd, final_set, tol);
  double total = 0.0;
  for (const ProjectionOutcome& o : report.outcomes) {
    total += o.residual * o.residual;
  }
  report.mse = total / static_cast<double>(report.outcomes.size());

  const std::size_t removed_total = data.size() - survivors.size();
  if (10 * removed_total > data.size()) {
    warnings.push_back(
        {WarningKind::kLargeRemoval,
         std::to_string(removed_total) + " of " + std::to_string(data.size()) +
             " points were removed; the data may not lie near a linearly "
             "embedded Stiefel manifold of this dimension"});
  }
  report.warnings = std::move(warnings);
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

FrameDataset recover_low_dim(const FitReport& report) {
  FrameDataset out(report.target_dim, report.frame_size, "psc low-dim");
  for (const ProjectionOutcome& o : report.outcomes) {
    if (o.y_hat) out.add(*o.y_hat);
  }
  return out;
}

Matrix GrassmannPoint::projector() const {
  return basis_.matrix() * basis_.matrix().transpose();
}

double GrassmannPoint::distance(const GrassmannPoint& other) const {
  if (basis_.rows() != other.basis_.rows()) {
    throw ShapeMismatch("Grassmann points live in different ambient spaces");
  }
  return (projector() - other.projector()).norm();
}

GrassmannReduction grassmann_reduce(const std::vector<GrassmannPoint>& data,
                                    Eigen::Index n,
                                    const FitOptions& options) {
  if (data.empty()) throw EmptySurvivors("dataset is empty");
  const Eigen::Index big_n = data.front().basis().rows();
  const Eigen::Index k = data.front().basis().cols();
  FrameDataset lifted(big_n, k, "grassmann lift");
  for (const GrassmannPoint& p : data) {
    if (p.basis().rows() != big_n || p.basis().cols() != k) {
      throw ShapeMismatch("Grassmann points must share N and k");
    }
    const SvdFactors f = svd_thin(p.projector());
    lifted.add(StiefelPoint::renormalize(f.u.leftCols(k)));
  }
  GrassmannReduction out{{}, psc_fit(lifted, n, options)};
  for (const ProjectionOutcome& o : out.report.outcomes) {
    out.reduced.emplace_back(*o.y_hat);
  }
  return out;
}

}  // namespace psc
