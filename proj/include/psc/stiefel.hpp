#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psc/linalg.hpp"

namespace psc {

/// Admission tolerance on ||A^T A - I||_F.
inline constexpr double kOrthonormalityTolerance = 1e-8;

/// An s x t matrix with orthonormal columns, s >= t >= 1.
class StiefelPoint {
 public:
  /// Throws NotOrthonormal when the defect exceeds kOrthonormalityTolerance
  /// and InvalidArgument on bad shapes or non-finite entries.
  explicit StiefelPoint(Matrix data);

  /// Polar-projects near-orthonormal input before admission.
  static StiefelPoint renormalize(const Matrix& data);

  const Matrix& matrix() const { return data_; }
  Eigen::Index rows() const { return data_.rows(); }
  Eigen::Index cols() const { return data_.cols(); }
  double defect() const { return defect_; }

 private:
  Matrix data_;
  double defect_;
};

/// Embeddings alpha in V_n(R^N) act on V_k(R^n) by left multiplication.
using Embedding = StiefelPoint;

/// Ordered collection of N x k frames.
class FrameDataset {
 public:
  FrameDataset(Eigen::Index ambient_dim, Eigen::Index frame_size,
               std::string source = {});

  void add(StiefelPoint point, std::optional<int> label = std::nullopt);

  /// Attaches labels to every point. Length must equal size().
  void set_labels(std::vector<int> labels);

  Eigen::Index ambient_dim() const { return ambient_dim_; }
  Eigen::Index frame_size() const { return frame_size_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const StiefelPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<StiefelPoint>& points() const { return points_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  const std::string& source() const { return source_; }
  void set_source(std::string source) { source_ = std::move(source); }

  /// Points restricted to `indices`, in the given order. Labels follow.
  FrameDataset subset(const std::vector<std::size_t>& indices) const;

  /// Horizontal concatenation [y_1 | y_2 | ...], N x (k * size()).
  Matrix concatenated() const;

 private:
  Eigen::Index ambient_dim_;
  Eigen::Index frame_size_;
  std::vector<StiefelPoint> points_;
  std::optional<std::vector<int>> labels_;
  std::string source_;
};

struct TangentVector {
  /// Throws InvalidArgument when base^T direction is not skew within 1e-8.
  TangentVector(StiefelPoint base, Matrix direction);

  StiefelPoint base;
  Matrix direction;
};

/// ||p - q||_F
double frobenius_distance(const Matrix& p, const Matrix& q);

/// Polar factor of a Gaussian s x t draw; uniform on V_t(R^s).
StiefelPoint uniform_stiefel(Eigen::Index s, Eigen::Index t,
                             std::uint64_t seed);

/// Haar-distributed element of O(k).
Matrix uniform_orthogonal(Eigen::Index k, std::uint64_t seed);

/// base * skew(base^T z) + (I - base base^T) z
TangentVector tangent_project(const StiefelPoint& base, const Matrix& z);

/// Polar retraction: polar factor of base + step.
StiefelPoint retract(const StiefelPoint& base, const Matrix& step);

/// Closed-form chordal Frechet mean: the polar factor of the entrywise sum.
/// Throws DegenerateMean when the sum is rank deficient.
StiefelPoint frechet_mean(const FrameDataset& points);

/// Mean squared Frobenius distance to the Frechet mean.
double frechet_variance(const FrameDataset& points);

/// Orthonormal basis of the orthogonal complement of span(basis).
Matrix orthogonal_complement(const Matrix& basis);

}  // namespace psc
