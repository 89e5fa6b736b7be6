#include "psc/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "psc/errors.hpp"
#include "psc/random.hpp"

namespace psc {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kAlphaStream = 1;
constexpr std::uint64_t kCoordinateStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kNeuronStream = 4;
constexpr std::uint64_t kWalkStream = 5;
constexpr std::uint64_t kBaseStream = 6;

}  // namespace

void NoisyEmbedConfig::validate() const {
  if (frame_size < 1 || target_dim < frame_size || ambient_dim < target_dim) {
    throw InvalidArgument("noisy embedding needs 1 <= k <= n <= N");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("epsilon must be finite and >= 0");
  }
  if (alpha && (alpha->rows() != ambient_dim || alpha->cols() != target_dim)) {
    throw ShapeMismatch("supplied alpha must be N x n");
  }
}

NoisyEmbedData generate_noisy_embedded(const NoisyEmbedConfig& config) {
  config.validate();
  const Eigen::Index big_n = config.ambient_dim;
  const Eigen::Index n = config.target_dim;
  const Eigen::Index k = config.frame_size;

  Embedding alpha = config.alpha
                        ? *config.alpha
                        : uniform_stiefel(big_n, n,
                                          derive_seed(config.seed, {kAlphaStream}));
  NoisyEmbedData out{FrameDataset(big_n, k, "noisy-embed"), alpha, {}};
  out.x.reserve(config.count);

  for (std::size_t i = 0; i < config.count; ++i) {
    StiefelPoint x =
        uniform_stiefel(n, k, derive_seed(config.seed, {kCoordinateStream, i}));
    const Matrix clean = alpha.matrix() * x.matrix();
    if (config.epsilon == 0.0) {
      out.data.add(StiefelPoint(clean));
      out.x.push_back(std::move(x));
      continue;
    }
    bool done = false;
    for (std::uint64_t attempt = 0; attempt < 8 && !done; ++attempt) {
      Matrix u = gaussian_matrix(
          big_n, k, derive_seed(config.seed, {kNoiseStream, i, attempt}));
      u /= u.norm();
      const Matrix perturbed = clean + config.epsilon * u;
      if (!rank_is_full(perturbed).full) continue;
      out.data.add(StiefelPoint(polar_factor(perturbed)));
      done = true;
    }
    if (!done) throw RankDeficiency(0.0);
    out.x.push_back(std::move(x));
  }
  return out;
}

void StimulusConfig::validate() const {
  if (neuron_count < 2) throw InvalidArgument("need at least two neurons");
  if (!(slope_min > 0.0 && slope_max >= slope_min)) {
    throw InvalidArgument("slope range must be positive and ordered");
  }
  if (walk_length < 1) throw InvalidArgument("walk_length must be >= 1");
  if (!(walk_step_std >= 0.0)) throw InvalidArgument("walk_step_std must be >= 0");
  if (!(interval_hi > interval_lo)) throw InvalidArgument("empty interval");
}

double tent_response(double slope, double distance) {
  return std::max(1.0 - slope * distance, 0.0);
}

StimulusData generate_stimulus_walk(const StimulusConfig& config) {
  config.validate();
  const int neurons = config.neuron_count;
  const double lo = config.interval_lo;
  const double hi = config.interval_hi;
  const double width = hi - lo;

  StimulusData out;
  out.neuron_positions.resize(neurons);
  out.slopes.resize(neurons);
  Rng neuron_rng(derive_seed(config.seed, {kNeuronStream}));
  for (int i = 0; i < neurons; ++i) {
    out.neuron_positions(i) = lo + width * i / (neurons - 1);
    out.slopes(i) = neuron_rng.uniform(config.slope_min, config.slope_max);
  }

  Rng walk_rng(derive_seed(config.seed, {kWalkStream}));
  out.truth.resize(config.walk_length);
  double s = walk_rng.uniform(lo, hi);
  for (std::size_t t = 0; t < config.walk_length; ++t) {
    if (t > 0) {
      s += config.walk_step_std * walk_rng.normal();
      // Reflect until inside; a single fold suffices unless the step is huge.
      while (s < lo || s > hi) {
        if (s < lo) s = 2.0 * lo - s;
        if (s > hi) s = 2.0 * hi - s;
      }
    }
    out.truth[t] = s;
  }

  out.responses.resize(neurons, static_cast<Eigen::Index>(config.walk_length));
  for (std::size_t t = 0; t < config.walk_length; ++t) {
    for (int i = 0; i < neurons; ++i) {
      out.responses(i, static_cast<Eigen::Index>(t)) = tent_response(
          out.slopes(i), std::abs(out.neuron_positions(i) - out.truth[t]));
    }
  }
  return out;
}

FrameDataset preprocess_responses(const Matrix& responses) {
  if (responses.rows() < 1 || responses.cols() < 1) {
    throw InvalidArgument("empty response matrix");
  }
  FrameDataset out(responses.rows(), 1, "stimulus");
  for (Eigen::Index t = 0; t < responses.cols(); ++t) {
    Matrix column = responses.col(t).array() - responses.col(t).mean();
    const double norm = column.norm();
    // Relative threshold: exact cancellation leaves rounding-level residue.
    if (!(norm > 1e-12 * std::max(1.0, responses.col(t).norm()))) {
      throw DegenerateStep(static_cast<std::size_t>(t));
    }
    out.add(StiefelPoint(column / norm));
  }
  return out;
}

double tent_bump(double normalized_distance) {
  return std::max(0.0, 1.0 - normalized_distance);
}

double wrap_unit(double b) {
  double w = b - std::floor(b);
  if (w >= 1.0) w = 0.0;
  return w;
}

double circle_distance(double a, double b) {
  const double d = std::abs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d);
}

CircleCover::CircleCover(int chart_count, BumpFunction bump)
    : chart_count_(chart_count), bump_(std::move(bump)) {
  if (chart_count < 3) throw InvalidArgument("a circle cover needs J >= 3");
}

double CircleCover::center(int j) const {
  return static_cast<double>(j) / chart_count_;
}

bool CircleCover::contains(int j, double b) const {
  return circle_distance(b, center(j)) * chart_count_ < 1.0;
}

std::vector<double> CircleCover::weights(double b) const {
  std::vector<double> w(chart_count_, 0.0);
  double total = 0.0;
  for (int j = 0; j < chart_count_; ++j) {
    const double x = circle_distance(b, center(j)) * chart_count_;
    if (x < 1.0) w[j] = std::max(0.0, bump_(x));
    total += w[j];
  }
  for (double& v : w) v /= total;
  return w;
}

int CircleCover::nearest_chart(double b) const {
  const double scaled = wrap_unit(b) * chart_count_;
  const int lower = static_cast<int>(std::floor(scaled)) % chart_count_;
  const int upper = (lower + 1) % chart_count_;
  const double d_lower = circle_distance(b, center(lower));
  const double d_upper = circle_distance(b, center(upper));
  if (d_lower < d_upper) return lower;
  if (d_upper < d_lower) return upper;
  return std::min(lower, upper);
}

double CircleCover::transition(int j, int l) const {
  if (j == l) return 1.0;
  const int diff = ((j - l) % chart_count_ + chart_count_) % chart_count_;
  if (diff != 1 && diff != chart_count_ - 1) return 0.0;
  const bool seam = (j == 0 && l == chart_count_ - 1) ||
                    (l == 0 && j == chart_count_ - 1);
  return seam ? -1.0 : 1.0;
}

StiefelPoint mobius_frame(const CircleCover& cover, double b, int chart) {
  if (!cover.contains(chart, b)) {
    throw InvalidArgument("base point is not in the requested chart");
  }
  const std::vector<double> phi = cover.weights(b);
  Matrix f = Matrix::Zero(cover.size(), 1);
  for (int j = 0; j < cover.size(); ++j) {
    if (phi[j] > 0.0) f(j, 0) = std::sqrt(phi[j]) * cover.transition(j, chart);
  }
  return StiefelPoint(std::move(f));
}

StiefelPoint torus_frame(const CircleCover& cover, double b1, double b2,
                         int chart1, int chart2) {
  if (!cover.contains(chart1, b1) || !cover.contains(chart2, b2)) {
    throw InvalidArgument("base point is not in the requested chart");
  }
  const int charts = cover.size();
  const std::vector<double> phi1 = cover.weights(b1);
  const std::vector<double> phi2 = cover.weights(b2);
  Matrix f = Matrix::Zero(2 * charts * charts, 2);
  for (int a = 0; a < charts; ++a) {
    if (phi1[a] == 0.0) continue;
    for (int c = 0; c < charts; ++c) {
      if (phi2[c] == 0.0) continue;
      const double scale = std::sqrt(phi1[a] * phi2[c]);
      const Eigen::Index row = 2 * (a * charts + c);
      f(row, 0) = scale * cover.transition(a, chart1);
      f(row + 1, 1) = scale * cover.transition(c, chart2);
    }
  }
  return StiefelPoint(std::move(f));
}

void BundleConfig::validate() const {
  if (chart_count < 3) throw InvalidArgument("chart_count must be >= 3");
  if (mode == BundleSampling::kPqCurve && (p == 0 || q == 0)) {
    throw InvalidArgument("(p, q) must be nonzero integers");
  }
  if (!bump) throw InvalidArgument("bump function is empty");
}

MobiusData mobius_lift(const BundleConfig& config) {
  config.validate();
  const CircleCover cover(config.chart_count, config.bump);
  MobiusData out{FrameDataset(config.chart_count, 1, "mobius"), {}, {}};
  Rng rng(derive_seed(config.seed, {kBaseStream}));
  for (std::size_t i = 0; i < config.sample_count; ++i) {
    const double b = rng.uniform();
    const int chart = cover.nearest_chart(b);
    out.data.add(mobius_frame(cover, b, chart));
    out.truth.push_back(b);
    out.charts.push_back(chart);
  }
  return out;
}

TorusData torus_whitney_lift(const BundleConfig& config) {
  config.validate();
  const CircleCover cover(config.chart_count, config.bump);
  const Eigen::Index big_n = 2 * config.chart_count * config.chart_count;
  TorusData out{FrameDataset(big_n, 2, "torus"), {}, {}};
  Rng rng(derive_seed(config.seed, {kBaseStream}));
  for (std::size_t i = 0; i < config.sample_count; ++i) {
    double b1;
    double b2;
    if (config.mode == BundleSampling::kUniform) {
      b1 = rng.uniform();
      b2 = rng.uniform();
    } else {
      const double t = rng.uniform();
      b1 = wrap_unit(config.p * t);
      b2 = wrap_unit(config.q * t);
      out.curve_param.push_back(t);
    }
    out.data.add(torus_frame(cover, b1, b2, cover.nearest_chart(b1),
                             cover.nearest_chart(b2)));
    out.truth.push_back({b1, b2});
  }
  return out;
}

}  // namespace psc
