#include "psc/eval.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "psc/errors.hpp"
#include "psc/random.hpp"

namespace psc {

namespace {

constexpr double kPi = std::numbers::pi;

FrameDataset survivors_of(const FitReport& report, const FrameDataset& data) {
  if (data.ambient_dim() != report.ambient_dim ||
      data.frame_size() != report.frame_size ||
      data.size() != report.input_count) {
    throw ShapeMismatch("dataset does not match the fit report");
  }
  return data.subset(report.survivors);
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double projection_mse(const FitReport& report) {
  if (report.outcomes.empty()) throw EmptySurvivors("fit has no survivors");
  double total = 0.0;
  for (const ProjectionOutcome& o : report.outcomes) {
    total += o.residual * o.residual;
  }
  return total / static_cast<double>(report.outcomes.size());
}

double variance_ratio(const FitReport& report, const FrameDataset& data) {
  const FrameDataset original = survivors_of(report, data);
  FrameDataset projected(report.ambient_dim, report.frame_size, "projected");
  for (const ProjectionOutcome& o : report.outcomes) projected.add(*o.projected);
  return frechet_variance(projected) / frechet_variance(original);
}

double variance_ratio_low_dim(const FitReport& report,
                              const FrameDataset& data) {
  const FrameDataset original = survivors_of(report, data);
  return frechet_variance(recover_low_dim(report)) /
         frechet_variance(original);
}

Vector spectrum(const FrameDataset& data) {
  if (data.empty()) throw InvalidArgument("spectrum of an empty dataset");
  const Matrix stacked = data.concatenated();
  const Matrix second_moment =
      (stacked * stacked.transpose()) / static_cast<double>(data.size());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(second_moment,
                                            Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalFailure(second_moment.rows(), second_moment.cols());
  }
  return eig.eigenvalues().reverse();
}

// ---------------------------------------------------------------------------

const LandscapeCell& LandscapeGrid::max_cell() const {
  if (cells.empty()) throw InvalidArgument("empty landscape grid");
  return *std::max_element(
      cells.begin(), cells.end(),
      [](const LandscapeCell& a, const LandscapeCell& b) {
        return a.cost < b.cost;
      });
}

double LandscapeGrid::spacing() const {
  const double dtheta = 2.0 * kPi / (theta_resolution - 1);
  const double dphi = 0.5 * kPi / (phi_resolution - 1);
  return std::max(dtheta, dphi);
}

Vector sphere_normal(double theta, double phi) {
  Vector v(3);
  v << std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta),
      std::cos(phi);
  return v;
}

Embedding plane_embedding(double theta, double phi) {
  Matrix a(3, 2);
  // Columns are the azimuthal and polar unit vectors at (theta, phi).
  a(0, 0) = -std::sin(theta);
  a(1, 0) = std::cos(theta);
  a(2, 0) = 0.0;
  a(0, 1) = std::cos(phi) * std::cos(theta);
  a(1, 1) = std::cos(phi) * std::sin(theta);
  a(2, 1) = -std::sin(phi);
  return StiefelPoint::renormalize(a);
}

LandscapeMarker plane_marker(const std::string& name, const Embedding& alpha) {
  if (alpha.rows() != 3 || alpha.cols() != 2) {
    throw ShapeMismatch("plane markers need alpha in V_2(R^3)");
  }
  Eigen::Vector3d c0 = alpha.matrix().col(0);
  Eigen::Vector3d c1 = alpha.matrix().col(1);
  Eigen::Vector3d v = c0.cross(c1).normalized();
  if (v.z() < 0.0) v = -v;
  double theta = std::atan2(v.y(), v.x());
  if (theta < 0.0) theta += 2.0 * kPi;
  const double phi = std::acos(std::clamp(v.z(), -1.0, 1.0));
  return {name, theta, phi};
}

double normal_line_angle(double theta1, double phi1, double theta2,
                         double phi2) {
  const double c =
      std::abs(sphere_normal(theta1, phi1).dot(sphere_normal(theta2, phi2)));
  return std::acos(std::min(c, 1.0));
}

LandscapeGrid landscape(const FrameDataset& data, int theta_resolution,
                        int phi_resolution,
                        const std::vector<LandscapeMarker>& markers) {
  if (data.ambient_dim() != 3 || data.frame_size() != 1) {
    throw ShapeMismatch("the landscape is defined for N = 3, k = 1 data");
  }
  if (theta_resolution < 2 || phi_resolution < 2) {
    throw InvalidArgument("landscape resolution must be at least 2 x 2");
  }
  if (data.empty()) throw InvalidArgument("landscape of an empty dataset");
  const Matrix stacked = data.concatenated();
  const double inv_m = 1.0 / static_cast<double>(data.size());

  LandscapeGrid grid;
  grid.theta_resolution = theta_resolution;
  grid.phi_resolution = phi_resolution;
  grid.markers = markers;
  grid.cells.reserve(static_cast<std::size_t>(theta_resolution) *
                     phi_resolution);
  for (int i = 0; i < phi_resolution; ++i) {
    const double phi = 0.5 * kPi * i / (phi_resolution - 1);
    for (int j = 0; j < theta_resolution; ++j) {
      const double theta = 2.0 * kPi * j / (theta_resolution - 1);
      const Matrix a = plane_embedding(theta, phi).matrix().transpose() * stacked;
      grid.cells.push_back({theta, phi, a.colwise().norm().sum() * inv_m});
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------

std::vector<double> unwrap_angles(const std::vector<double>& angles) {
  std::vector<double> out(angles.size());
  double shift = 0.0;
  for (std::size_t t = 0; t < angles.size(); ++t) {
    if (t > 0) {
      const double jump = angles[t] - angles[t - 1];
      shift -= 2.0 * kPi * std::round(jump / (2.0 * kPi));
    }
    out[t] = angles[t] + shift;
  }
  return out;
}

std::vector<double> gaussian_smooth(const std::vector<double>& values,
                                    double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (sigma == 0.0 || values.empty()) return values;
  const auto radius = static_cast<std::ptrdiff_t>(4.0 * sigma + 0.5);
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (std::ptrdiff_t x = -radius; x <= radius; ++x) {
    const double w = std::exp(-0.5 * (x * x) / (sigma * sigma));
    kernel[x + radius] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  const auto n = static_cast<std::ptrdiff_t>(values.size());
  auto reflect = [n](std::ptrdiff_t i) {
    const std::ptrdiff_t period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
  };
  std::vector<double> out(values.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::ptrdiff_t x = -radius; x <= radius; ++x) {
      acc += kernel[x + radius] * values[reflect(t + x)];
    }
    out[t] = acc;
  }
  return out;
}

PathRecovery recover_path(const FrameDataset& low_dim,
                          const std::vector<double>& truth,
                          double smoothing_sigma) {
  if (low_dim.ambient_dim() != 2 || low_dim.frame_size() != 1) {
    throw ShapeMismatch("path recovery needs V_1(R^2) coordinates");
  }
  if (low_dim.size() != truth.size()) {
    throw ShapeMismatch("recovered path and truth differ in length");
  }
  if (truth.empty()) throw InvalidArgument("empty path");

  PathRecovery out;
  out.raw.reserve(truth.size());
  out.grassmann.reserve(truth.size());
  for (const StiefelPoint& p : low_dim.points()) {
    const double a = std::atan2(p.matrix()(1, 0), p.matrix()(0, 0));
    out.raw.push_back(a);
    double g = std::fmod(a, kPi);
    if (g < 0.0) g += kPi;
    if (g >= kPi) g = 0.0;
    out.grassmann.push_back(g);
  }
  out.smoothed_truth = gaussian_smooth(truth, smoothing_sigma);

  const std::size_t len = truth.size();
  out.mse = std::numeric_limits<double>::infinity();
  for (const double orientation : {1.0, -1.0}) {
    std::vector<double> oriented(len);
    for (std::size_t t = 0; t < len; ++t) oriented[t] = orientation * out.raw[t];
    const std::vector<double> unwrapped = unwrap_angles(oriented);

    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const double d = unwrapped[t] - unwrapped[0];
      num += d * (truth[t] - truth[0]);
      den += d * d;
    }
    // The sign is carried by the orientation, so the scale stays nonnegative.
    const double scale = den > 0.0 ? std::max(0.0, num / den) : 1.0;

    std::vector<double> aligned(len);
    for (std::size_t t = 0; t < len; ++t) {
      aligned[t] = truth[0] + scale * (unwrapped[t] - unwrapped[0]);
    }
    std::vector<double> smoothed = gaussian_smooth(aligned, smoothing_sigma);
    double err = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const double d = smoothed[t] - out.smoothed_truth[t];
      err += d * d;
    }
    err /= static_cast<double>(len);
    if (err < out.mse) {
      out.mse = err;
      out.orientation = orientation;
      out.scale = scale;
      out.offset = truth[0] - scale * unwrapped[0];
      out.aligned = std::move(aligned);
      out.smoothed = std::move(smoothed);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct LloydRun {
  std::vector<int> labels;
  std::vector<Matrix> centroids;
  double objective = 0.0;
  std::vector<double> trace;
  int repairs = 0;
};

double assign(const std::vector<Matrix>& points,
              const std::vector<Matrix>& centroids, std::vector<int>& labels,
              std::vector<double>& dist2) {
  double objective = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = (points[i] - centroids[c]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    dist2[i] = best_d;
    objective += best_d;
  }
  return objective;
}

LloydRun lloyd(const std::vector<Matrix>& points, int clusters, int max_iters,
               std::uint64_t seed) {
  const std::size_t m = points.size();
  LloydRun run;
  Rng rng(seed);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int c = 0; c < clusters; ++c) {
    const std::size_t j = c + rng.below(m - c);
    std::swap(order[c], order[j]);
    run.centroids.push_back(points[order[c]]);
  }

  run.labels.assign(m, -1);
  std::vector<int> labels(m, 0);
  std::vector<double> dist2(m, 0.0);
  for (int iter = 0; iter < max_iters; ++iter) {
    run.objective = assign(points, run.centroids, labels, dist2);
    run.trace.push_back(run.objective);
    if (labels == run.labels) break;
    run.labels = labels;

    std::vector<Matrix> sums(clusters,
                             Matrix::Zero(points[0].rows(), points[0].cols()));
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < m; ++i) {
      sums[labels[i]] += points[i];
      ++counts[labels[i]];
    }
    std::vector<bool> taken(m, false);
    for (int c = 0; c < clusters; ++c) {
      const double tol = kRankTolerance * std::max<double>(1.0, counts[c]);
      if (counts[c] > 0 && rank_is_full(sums[c], tol).full) {
        run.centroids[c] = polar_factor(sums[c], tol);
        continue;
      }
      std::size_t far = m;
      for (std::size_t i = 0; i < m; ++i) {
        if (taken[i]) continue;
        if (far == m || dist2[i] > dist2[far]) far = i;
      }
      if (far == m) far = 0;
      taken[far] = true;
      run.centroids[c] = points[far];
      ++run.repairs;
    }
  }
  return run;
}

}  // namespace

KMeansResult kmeans_stiefel(const FrameDataset& points,
                            const KMeansConfig& config) {
  if (config.cluster_count < 1) throw InvalidArgument("cluster_count must be >= 1");
  if (static_cast<std::size_t>(config.cluster_count) > points.size()) {
    throw InvalidArgument("cluster_count exceeds the number of points");
  }
  if (config.restarts < 1 || config.max_iters < 1) {
    throw InvalidArgument("restarts and max_iters must be positive");
  }
  std::vector<Matrix> mats;
  mats.reserve(points.size());
  for (const StiefelPoint& p : points.points()) mats.push_back(p.matrix());

  LloydRun best;
  bool have_best = false;
  int repairs = 0;
  for (int r = 0; r < config.restarts; ++r) {
    LloydRun run = lloyd(mats, config.cluster_count, config.max_iters,
                         derive_seed(config.seed, {static_cast<std::uint64_t>(r)}));
    repairs += run.repairs;
    if (!have_best || run.objective < best.objective) {
      best = std::move(run);
      have_best = true;
    }
  }

  KMeansResult out;
  out.labels = best.labels;
  out.objective = best.objective;
  out.objective_trace = best.trace;
  out.repairs = repairs;
  for (const Matrix& c : best.centroids) out.centroids.emplace_back(c);
  return out;
}

double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw ShapeMismatch("labelings differ in length");
  }
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    joint[{labels_a[i], labels_b[i]}] += 1.0;
    rows[labels_a[i]] += 1.0;
    cols[labels_b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, count] : joint) index += choose2(count);
  double sum_a = 0.0;
  for (const auto& [key, count] : rows) sum_a += choose2(count);
  double sum_b = 0.0;
  for (const auto& [key, count] : cols) sum_b += choose2(count);
  const double total = choose2(static_cast<double>(labels_a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

PairedTest paired_t_test_less(const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("paired samples differ in size");
  if (a.size() < 2) throw DegenerateStatistic("paired test needs two pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));

  PairedTest out;
  out.n = n;
  out.mean_difference = mean;
  if (sd == 0.0) {
    if (mean == 0.0) {
      throw DegenerateStatistic("paired samples are identical");
    }
    out.t_statistic = mean < 0.0 ? -std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::infinity();
    out.p_value = mean < 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  out.p_value = boost::math::cdf(dist, out.t_statistic);
  return out;
}

}  // namespace psc
