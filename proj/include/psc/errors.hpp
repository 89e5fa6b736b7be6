#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or dimension combination supplied by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// An iterative decomposition failed to converge.
class NumericalFailure : public Error {
 public:
  NumericalFailure(std::ptrdiff_t rows, std::ptrdiff_t cols)
      : Error("SVD failed to converge on a " + std::to_string(rows) + "x" +
              std::to_string(cols) + " matrix"),
        rows_(rows),
        cols_(cols) {}

  std::ptrdiff_t rows() const { return rows_; }
  std::ptrdiff_t cols() const { return cols_; }

 private:
  std::ptrdiff_t rows_;
  std::ptrdiff_t cols_;
};

class RankDeficiency : public Error {
 public:
  explicit RankDeficiency(double sigma_min)
      : Error("matrix is rank deficient (smallest singular value " +
              std::to_string(sigma_min) + ")"),
        sigma_min_(sigma_min) {}

  double sigma_min() const { return sigma_min_; }

 private:
  double sigma_min_;
};

/// A matrix handed to a StiefelPoint constructor is not orthonormal.
class NotOrthonormal : public Error {
 public:
  explicit NotOrthonormal(double defect)
      : Error("columns are not orthonormal (defect " + std::to_string(defect) +
              ")"),
        defect_(defect) {}

  double defect() const { return defect_; }

 private:
  double defect_;
};

/// The point lies outside the domain of the projection (rank(alpha^T y) < k).
class DomainError : public Error {
 public:
  explicit DomainError(double sigma_min)
      : Error("point outside projection domain (sigma_min " +
              std::to_string(sigma_min) + ")"),
        sigma_min_(sigma_min) {}

  double sigma_min() const { return sigma_min_; }

 private:
  double sigma_min_;
};

/// The Frechet mean is not unique because the point sum is rank deficient.
class DegenerateMean : public Error {
 public:
  explicit DegenerateMean(double sigma_min)
      : Error("Frechet mean is not unique (sigma_min of point sum " +
              std::to_string(sigma_min) + ")"),
        sigma_min_(sigma_min) {}

  double sigma_min() const { return sigma_min_; }

 private:
  double sigma_min_;
};

class EmptySurvivors : public Error {
 public:
  using Error::Error;
};

/// A time step of a response matrix is zero after centering.
class DegenerateStep : public Error {
 public:
  explicit DegenerateStep(std::size_t index)
      : Error("response at step " + std::to_string(index) +
              " is zero after centering"),
        index_(index) {}

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// A summary statistic is undefined for the given sample.
class DegenerateStatistic : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace psc
