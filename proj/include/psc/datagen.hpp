#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "psc/stiefel.hpp"

namespace psc {

// ---------------------------------------------------------------------------
// Noisy frames near a linearly embedded low-dimensional Stiefel manifold.

struct NoisyEmbedConfig {
  Eigen::Index ambient_dim = 3;  ///< N
  Eigen::Index target_dim = 2;   ///< n
  Eigen::Index frame_size = 1;   ///< k
  std::size_t count = 100;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  /// Generating embedding; sampled uniformly on V_n(R^N) when empty.
  std::optional<Embedding> alpha;

  void validate() const;
};

struct NoisyEmbedData {
  FrameDataset data;
  Embedding alpha;
  std::vector<StiefelPoint> x;  ///< clean coordinates in V_k(R^n)
};

/// y_i = polar(alpha x_i + epsilon U_i) with x_i uniform on V_k(R^n) and U_i
/// uniform on the unit Frobenius sphere of N x k matrices.
NoisyEmbedData generate_noisy_embedded(const NoisyEmbedConfig& config);

// ---------------------------------------------------------------------------
// Tent-tuned neurons on a half circle driven by a reflected random walk.

struct StimulusConfig {
  int neuron_count = 100;
  double slope_min = 25.0;
  double slope_max = 50.0;
  std::size_t walk_length = 13000;
  double walk_step_std = 0.01;  ///< radians
  double interval_lo = 0.0;
  double interval_hi = std::numbers::pi;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StimulusData {
  /// neuron_count x walk_length; column t is the population response at t.
  Matrix responses;
  std::vector<double> truth;  ///< stimulus angle per step
  Vector neuron_positions;
  Vector slopes;
};

/// max(1 - slope * distance, 0)
double tent_response(double slope, double distance);

StimulusData generate_stimulus_walk(const StimulusConfig& config);

/// Subtracts the population's average response from every entry of a time
/// step, then scales the step to unit norm. Throws DegenerateStep for a step
/// that is zero after centering, i.e. one where all neurons respond equally.
FrameDataset preprocess_responses(const Matrix& responses);

// ---------------------------------------------------------------------------
// Frame-valued lifts of vector bundle classifying maps.

/// Raw bump weight as a function of the normalized distance J * d(b, center);
/// must vanish for arguments >= 1. Weights are normalized to sum to one.
using BumpFunction = std::function<double(double)>;

double tent_bump(double normalized_distance);

/// Cover of R/Z by J arcs U_j = ((j-1)/J, (j+1)/J), j = 0..J-1, with a
/// partition of unity and the Mobius transition functions: +1 on every
/// overlap except the one between the last and first arc, which carries -1.
class CircleCover {
 public:
  explicit CircleCover(int chart_count, BumpFunction bump = tent_bump);

  int size() const { return chart_count_; }
  double center(int j) const;
  /// Partition of unity at b, length J.
  std::vector<double> weights(double b) const;
  /// Arc whose center is nearest to b; ties go to the lower index.
  int nearest_chart(double b) const;
  bool contains(int j, double b) const;
  /// Transition value on U_j intersect U_l: +-1, or 0 when they are disjoint.
  double transition(int j, int l) const;

 private:
  int chart_count_;
  BumpFunction bump_;
};

/// Circle distance on R/Z.
double circle_distance(double a, double b);
/// Representative of b in [0, 1).
double wrap_unit(double b);

/// Local lift f_l(b) = [sqrt(phi_j(b)) Omega_jl]_j as a J x 1 frame.
/// Requires b in U_l.
StiefelPoint mobius_frame(const CircleCover& cover, double b, int chart);

/// Rank-2 lift of the Whitney sum over the torus: a (2 J^2) x 2 frame.
StiefelPoint torus_frame(const CircleCover& cover, double b1, double b2,
                         int chart1, int chart2);

enum class BundleSampling { kUniform, kPqCurve };

struct BundleConfig {
  int chart_count = 25;  ///< per factor circle for the torus
  std::size_t sample_count = 1000;
  BundleSampling mode = BundleSampling::kUniform;
  int p = 1;
  int q = 1;
  std::uint64_t seed = 0;
  BumpFunction bump = tent_bump;

  void validate() const;
};

struct MobiusData {
  FrameDataset data;
  std::vector<double> truth;  ///< base point b in [0, 1)
  std::vector<int> charts;
};

MobiusData mobius_lift(const BundleConfig& config);

struct TorusData {
  FrameDataset data;
  std::vector<std::array<double, 2>> truth;  ///< (b1, b2) in [0, 1)^2
  /// Curve parameter t for pq-curve sampling; empty for uniform sampling.
  std::vector<double> curve_param;
};

TorusData torus_whitney_lift(const BundleConfig& config);

}  // namespace psc
