#include "psc/stiefel.hpp"

#include <algorithm>

#include "psc/errors.hpp"
#include "psc/random.hpp"

namespace psc {

namespace {

double orthonormality_defect(const Matrix& a) {
  const Matrix gram = a.transpose() * a;
  return (gram - Matrix::Identity(a.cols(), a.cols())).norm();
}

void require_same_shape(const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw ShapeMismatch("shape mismatch: " + std::to_string(p.rows()) + "x" +
                        std::to_string(p.cols()) + " vs " +
                        std::to_string(q.rows()) + "x" +
                        std::to_string(q.cols()));
  }
}

}  // namespace

StiefelPoint::StiefelPoint(Matrix data) : data_(std::move(data)) {
  if (data_.cols() < 1 || data_.rows() < data_.cols()) {
    throw InvalidArgument("Stiefel point needs rows >= cols >= 1, got " +
                          std::to_string(data_.rows()) + "x" +
                          std::to_string(data_.cols()));
  }
  if (!all_finite(data_)) throw InvalidArgument("non-finite Stiefel entries");
  defect_ = orthonormality_defect(data_);
  if (!(defect_ <= kOrthonormalityTolerance)) throw NotOrthonormal(defect_);
}

StiefelPoint StiefelPoint::renormalize(const Matrix& data) {
  return StiefelPoint(polar_factor(data));
}

FrameDataset::FrameDataset(Eigen::Index ambient_dim, Eigen::Index frame_size,
                           std::string source)
    : ambient_dim_(ambient_dim),
      frame_size_(frame_size),
      source_(std::move(source)) {
  if (frame_size < 1 || ambient_dim < frame_size) {
    throw InvalidArgument("dataset needs N >= k >= 1");
  }
}

void FrameDataset::add(StiefelPoint point, std::optional<int> label) {
  if (point.rows() != ambient_dim_ || point.cols() != frame_size_) {
    throw ShapeMismatch("dataset expects " + std::to_string(ambient_dim_) +
                        "x" + std::to_string(frame_size_) + " frames");
  }
  if (label.has_value() != labels_.has_value() && !points_.empty()) {
    throw InvalidArgument("labels must be given for all points or none");
  }
  if (label) {
    if (!labels_) labels_.emplace();
    labels_->push_back(*label);
  }
  points_.push_back(std::move(point));
}

void FrameDataset::set_labels(std::vector<int> labels) {
  if (labels.size() != points_.size()) {
    throw InvalidArgument("label count does not match point count");
  }
  labels_ = std::move(labels);
}

FrameDataset FrameDataset::subset(
    const std::vector<std::size_t>& indices) const {
  FrameDataset out(ambient_dim_, frame_size_, source_);
  for (std::size_t i : indices) {
    if (i >= points_.size()) throw InvalidArgument("subset index out of range");
    out.points_.push_back(points_[i]);
  }
  if (labels_) {
    out.labels_.emplace();
    for (std::size_t i : indices) out.labels_->push_back((*labels_)[i]);
  }
  return out;
}

Matrix FrameDataset::concatenated() const {
  Matrix out(ambient_dim_,
             frame_size_ * static_cast<Eigen::Index>(points_.size()));
  for (std::size_t i = 0; i < points_.size(); ++i) {
    out.middleCols(static_cast<Eigen::Index>(i) * frame_size_, frame_size_) =
        points_[i].matrix();
  }
  return out;
}

TangentVector::TangentVector(StiefelPoint base_point, Matrix dir)
    : base(std::move(base_point)), direction(std::move(dir)) {
  require_same_shape(base.matrix(), direction);
  const Matrix m = base.matrix().transpose() * direction;
  if ((m + m.transpose()).norm() > 2e-8) {
    throw InvalidArgument("direction is not tangent at base");
  }
}

double frobenius_distance(const Matrix& p, const Matrix& q) {
  require_same_shape(p, q);
  return (p - q).norm();
}

StiefelPoint uniform_stiefel(Eigen::Index s, Eigen::Index t,
                             std::uint64_t seed) {
  if (t < 1 || s < t) throw InvalidArgument("uniform_stiefel needs s >= t >= 1");
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    const Matrix g = gaussian_matrix(s, t, derive_seed(seed, {attempt}));
    if (rank_is_full(g).full) return StiefelPoint(polar_factor(g));
  }
  throw RankDeficiency(0.0);
}

Matrix uniform_orthogonal(Eigen::Index k, std::uint64_t seed) {
  return uniform_stiefel(k, k, seed).matrix();
}

TangentVector tangent_project(const StiefelPoint& base, const Matrix& z) {
  require_same_shape(base.matrix(), z);
  const Matrix& x = base.matrix();
  const Matrix xtz = x.transpose() * z;
  Matrix dir = x * skew(xtz) + (z - x * xtz);
  return TangentVector(base, std::move(dir));
}

StiefelPoint retract(const StiefelPoint& base, const Matrix& step) {
  require_same_shape(base.matrix(), step);
  return StiefelPoint(polar_factor(base.matrix() + step));
}

StiefelPoint frechet_mean(const FrameDataset& points) {
  if (points.empty()) throw InvalidArgument("Frechet mean of empty dataset");
  Matrix sum = Matrix::Zero(points.ambient_dim(), points.frame_size());
  for (const StiefelPoint& y : points.points()) sum += y.matrix();
  const double tol =
      kRankTolerance * std::max<double>(1.0, static_cast<double>(points.size()));
  const RankTest rank = rank_is_full(sum, tol);
  if (!rank.full) throw DegenerateMean(rank.sigma_min);
  return StiefelPoint(polar_factor(sum, tol));
}

double frechet_variance(const FrameDataset& points) {
  const StiefelPoint mean = frechet_mean(points);
  double total = 0.0;
  for (const StiefelPoint& y : points.points()) {
    total += (y.matrix() - mean.matrix()).squaredNorm();
  }
  return total / static_cast<double>(points.size());
}

Matrix orthogonal_complement(const Matrix& basis) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index r = basis.cols();
  if (r >= n) return Matrix(n, 0);
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - r);
}

}  // namespace psc
