#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psc/pipeline.hpp"

namespace psc {

/// Mean squared residual over the surviving points of a fit.
double projection_mse(const FitReport& report);

/// Frechet variance of the projected survivors alpha * y_hat over the Frechet
/// variance of the same survivors in `data` (the dataset that was fitted).
double variance_ratio(const FitReport& report, const FrameDataset& data);

/// Same ratio with the projected points taken in V_k(R^n) coordinates y_hat.
/// Agrees with variance_ratio because alpha is an isometry.
double variance_ratio_low_dim(const FitReport& report,
                              const FrameDataset& data);

/// Eigenvalues of (1/|Y|) sum y y^T, nonincreasing. Sums to k.
Vector spectrum(const FrameDataset& data);

// ---------------------------------------------------------------------------
// Cost landscape over planes in R^3.

struct LandscapeCell {
  double theta;  ///< azimuth of the plane normal, [0, 2 pi]
  double phi;    ///< inclination of the plane normal, [0, pi / 2]
  double cost;
};

struct LandscapeMarker {
  std::string name;
  double theta;
  double phi;
};

struct LandscapeGrid {
  int theta_resolution = 0;
  int phi_resolution = 0;
  /// phi-major: cells[i * theta_resolution + j] has phi index i, theta index j.
  std::vector<LandscapeCell> cells;
  std::vector<LandscapeMarker> markers;

  const LandscapeCell& max_cell() const;
  /// Largest angular step between neighbouring grid nodes.
  double spacing() const;
};

/// Unit normal (sin phi cos theta, sin phi sin theta, cos phi).
Vector sphere_normal(double theta, double phi);

/// A 3 x 2 orthonormal basis of the plane orthogonal to sphere_normal.
Embedding plane_embedding(double theta, double phi);

/// (theta, phi) of the upper-hemisphere normal of a plane alpha in V_2(R^3).
LandscapeMarker plane_marker(const std::string& name, const Embedding& alpha);

/// Angle in [0, pi / 2] between the lines spanned by two normals.
double normal_line_angle(double theta1, double phi1, double theta2,
                         double phi2);

/// Evaluates the fitting cost on a theta x phi grid that includes both
/// endpoints of each range. Requires N = 3 and k = 1.
LandscapeGrid landscape(const FrameDataset& data, int theta_resolution,
                        int phi_resolution,
                        const std::vector<LandscapeMarker>& markers = {});

// ---------------------------------------------------------------------------
// Circular coordinates.

struct PathRecovery {
  std::vector<double> raw;        ///< atan2 angles in (-pi, pi]
  std::vector<double> grassmann;  ///< raw mod pi, in [0, pi)
  std::vector<double> aligned;
  std::vector<double> smoothed;
  std::vector<double> smoothed_truth;
  double orientation = 1.0;  ///< +1 or -1
  double offset = 0.0;
  double scale = 1.0;
  double mse = 0.0;
};

/// Adds multiples of 2 pi so that consecutive samples differ by at most pi.
std::vector<double> unwrap_angles(const std::vector<double>& angles);

/// Gaussian filter with reflecting boundaries, truncated at four sigma.
std::vector<double> gaussian_smooth(const std::vector<double>& values,
                                    double sigma);

/// Reads angles off V_1(R^2) coordinates and aligns them to `truth`: for each
/// orientation the unwrapped angles are shifted to match the first truth
/// sample and scaled about it by least squares; both sequences are smoothed
/// and the orientation with the smaller MSE is kept.
PathRecovery recover_path(const FrameDataset& low_dim,
                          const std::vector<double>& truth,
                          double smoothing_sigma = 100.0);

// ---------------------------------------------------------------------------
// Clustering.

struct KMeansConfig {
  int cluster_count = 2;
  std::uint64_t seed = 0;
  int restarts = 10;
  int max_iters = 100;
};

struct KMeansResult {
  std::vector<int> labels;
  std::vector<StiefelPoint> centroids;
  double objective = 0.0;  ///< within-cluster sum of squared distances
  /// Objective after each assignment step of the winning restart.
  std::vector<double> objective_trace;
  /// Centroids reseeded from the farthest point, over all restarts.
  int repairs = 0;
};

/// Lloyd iterations under the Frobenius distance with polar-factor centroids;
/// best of `restarts` seeded initializations. An empty cluster, or one whose
/// member sum is rank deficient, takes the point farthest from its centroid.
KMeansResult kmeans_stiefel(const FrameDataset& points,
                            const KMeansConfig& config);

double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b);

// ---------------------------------------------------------------------------
// Paired comparison.

struct PairedTest {
  std::size_t n = 0;
  double mean_difference = 0.0;  ///< mean of a - b
  double t_statistic = 0.0;
  double p_value = 1.0;  ///< one-sided, alternative mean(a - b) < 0
};

/// Paired Student t test. Throws DegenerateStatistic for fewer than two
/// pairs or for identical samples.
PairedTest paired_t_test_less(const std::vector<double>& a,
                              const std::vector<double>& b);

}  // namespace psc
