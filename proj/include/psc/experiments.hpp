#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psc/datagen.hpp"
#include "psc/eval.hpp"

namespace psc {

/// Shared knobs of the experiment runners. With `out_dir` set, datasets,
/// reports, metrics and a summary are written there.
struct ExperimentOptions {
  std::uint64_t seed = 1;
  /// Number of trials; 0 selects the runner's default.
  int trials = 0;
  std::optional<std::filesystem::path> out_dir;
};

/// Noisy great circle in S^2 (N = 3, n = 2, k = 1) with its cost landscape.
struct CircleConfig {
  double epsilon = 0.8;
  std::size_t count = 100;
  int theta_resolution = 121;
  int phi_resolution = 31;
};

struct CircleResult {
  double cost_true = 0.0;
  double cost_pca = 0.0;
  double cost_gd = 0.0;
  LandscapeGrid grid;
  std::string summary;
};

CircleResult run_circle(const ExperimentOptions& options,
                        const CircleConfig& config = {});

/// Variance ratio as a function of the target dimension n.
struct VarianceConfig {
  Eigen::Index ambient_dim = 11;
  Eigen::Index generating_dim = 6;
  Eigen::Index frame_size = 1;
  std::size_t count = 200;
  double epsilon = 0.1;
};

struct VarianceResult {
  std::vector<Eigen::Index> dims;
  /// NaN where a Frechet mean is not unique; such rows are left out of
  /// variance_ratio.csv.
  std::vector<double> ratios;
  Vector spectrum;
  std::string summary;
};

VarianceResult run_variance(const ExperimentOptions& options,
                            const VarianceConfig& config = {});

/// Population of tent-tuned neurons; circular coordinate recovered from the
/// fit to V_1(R^2) under alpha_PCA and alpha_GD.
struct StimulusResult {
  double path_mse_pca = 0.0;
  double path_mse_gd = 0.0;
  double cost_pca = 0.0;
  double cost_gd = 0.0;
  PathRecovery path_pca;
  PathRecovery path_gd;
  std::string summary;
};

StimulusResult run_stimulus(const ExperimentOptions& options,
                            const StimulusConfig& config = {});

/// Per-trial projection MSE under alpha_PCA and alpha_GD on shared data.
struct PairedComparison {
  std::vector<double> mse_pca;
  std::vector<double> mse_gd;
  PairedTest test;
};

struct MobiusResult {
  PairedComparison comparison;
  std::string summary;
};

/// Defaults: 10 trials of 1000 points, J = 25, fit to n = 2.
MobiusResult run_mobius(const ExperimentOptions& options,
                        std::size_t sample_count = 1000, int chart_count = 25);

struct TorusResult {
  PairedComparison curve_1_1;
  PairedComparison curve_1_15;
  std::string summary;
};

/// Defaults: 5 trials per curve of 1000 points, 10 charts per factor, fit to
/// V_2(R^2).
TorusResult run_torus(const ExperimentOptions& options,
                      std::size_t sample_count = 1000, int chart_count = 10);

/// Fits `data` to dimension n and returns (mse under alpha_PCA, mse under
/// alpha_GD) over the survivors of the fit.
std::pair<double, double> pca_gd_mse(const FrameDataset& data, Eigen::Index n,
                                     const FitOptions& options = {});

}  // namespace psc
