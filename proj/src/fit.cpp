#include "psc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "psc/errors.hpp"
#include "psc/random.hpp"

namespace psc {

namespace {

// Everything the optimizer needs at one alpha, computed in a single pass over
// the stacked data so that cost and gradient come from the same SVDs.
struct Evaluation {
  double cost = 0.0;
  double sigma_min = 0.0;
  Matrix euclidean_grad;  // (1/|Y|) sum y y_hat^T
};

Evaluation evaluate(const Matrix& alpha, const Matrix& stacked,
                    Eigen::Index k) {
  const Eigen::Index m = stacked.cols() / k;
  const Matrix a = alpha.transpose() * stacked;  // n x (k m)
  Matrix y_hat(a.rows(), a.cols());
  Evaluation ev;
  ev.sigma_min = std::numeric_limits<double>::infinity();
  double total = 0.0;
  if (k == 1) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double norm = a.col(i).norm();
      total += norm;
      ev.sigma_min = std::min(ev.sigma_min, norm);
      if (norm > 0.0) {
        y_hat.col(i) = a.col(i) / norm;
      } else {
        y_hat.col(i).setZero();
      }
    }
  } else {
    for (Eigen::Index i = 0; i < m; ++i) {
      const SvdFactors f = svd_thin(a.middleCols(i * k, k));
      total += f.singular_values.sum();
      ev.sigma_min = std::min(ev.sigma_min, f.singular_values(k - 1));
      y_hat.middleCols(i * k, k) = f.u * f.v.transpose();
    }
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  ev.cost = total * inv_m;
  ev.euclidean_grad = (stacked * y_hat.transpose()) * inv_m;
  return ev;
}

Matrix riemannian_direction(const Matrix& alpha, const Matrix& egrad) {
  return egrad - alpha * (alpha.transpose() * egrad);
}

void require_fit_shapes(const FrameDataset& data, const Embedding& alpha) {
  if (alpha.rows() != data.ambient_dim()) {
    throw ShapeMismatch("embedding rows must equal the ambient dimension");
  }
  if (alpha.cols() < data.frame_size()) {
    throw ShapeMismatch("embedding dimension n must be at least k");
  }
}

}  // namespace

void GdConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("max_iters must be positive");
  if (!(grad_tol >= 0.0)) throw InvalidArgument("grad_tol must be >= 0");
  if (!(initial_step > 0.0)) throw InvalidArgument("initial_step must be > 0");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
    throw InvalidArgument("armijo_shrink must lie in (0, 1)");
  }
  if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) {
    throw InvalidArgument("armijo_slope must lie in (0, 1)");
  }
  if (!(min_step > 0.0)) throw InvalidArgument("min_step must be > 0");
}

void RansacConfig::validate() const {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw InvalidArgument("keep_fraction must lie in (0, 1]");
  }
  if (!(outlier_threshold > 0.0)) {
    throw InvalidArgument("outlier_threshold must be > 0");
  }
  if (!(residual_floor >= 0.0 && std::isfinite(residual_floor))) {
    throw InvalidArgument("residual_floor must be finite and >= 0");
  }
  if (max_rounds < 1) throw InvalidArgument("max_rounds must be positive");
}

const char* to_string(GdStatus status) {
  switch (status) {
    case GdStatus::kGradientTolerance:
      return "gradient_tolerance";
    case GdStatus::kStepTolerance:
      return "step_tolerance";
    case GdStatus::kIterationBudget:
      return "iteration_budget";
  }
  return "unknown";
}

double cost(const Embedding& alpha, const FrameDataset& data) {
  require_fit_shapes(data, alpha);
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const StiefelPoint& y : data.points()) {
    total += nuclear_norm(alpha.matrix().transpose() * y.matrix());
  }
  return total / static_cast<double>(data.size());
}

TangentVector riemannian_gradient(const Embedding& alpha,
                                  const FrameDataset& data, double tol) {
  require_fit_shapes(data, alpha);
  if (data.empty()) throw InvalidArgument("gradient of empty dataset");
  const Evaluation ev =
      evaluate(alpha.matrix(), data.concatenated(), data.frame_size());
  if (!(ev.sigma_min > tol)) throw DomainError(ev.sigma_min);
  return TangentVector(alpha,
                       riemannian_direction(alpha.matrix(), ev.euclidean_grad));
}

AlphaPca alpha_pca(const FrameDataset& data, Eigen::Index n,
                   PcaVariant variant) {
  const Eigen::Index big_n = data.ambient_dim();
  const Eigen::Index k = data.frame_size();
  if (data.empty()) throw InvalidArgument("alpha_pca needs a nonempty dataset");
  if (n < k || n > big_n) {
    throw InvalidArgument("alpha_pca needs k <= n <= N, got n = " +
                          std::to_string(n));
  }
  const Matrix stacked = data.concatenated();
  const double m = static_cast<double>(data.size());

  Matrix basis;
  Vector spectrum;
  if (variant == PcaVariant::kEig) {
    const Matrix second_moment = (stacked * stacked.transpose()) / m;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(second_moment);
    if (eig.info() != Eigen::Success) throw NumericalFailure(big_n, big_n);
    spectrum = eig.eigenvalues().reverse();
    basis = eig.eigenvectors().rowwise().reverse().leftCols(n);
  } else {
    if (stacked.cols() < n) {
      throw InvalidArgument(
          "concatenated SVD needs at least n columns in the data");
    }
    const SvdFactors f = svd_thin(stacked);
    basis = f.u.leftCols(n);
    spectrum = Vector::Zero(big_n);
    spectrum.head(f.singular_values.size()) =
        f.singular_values.array().square() / m;
  }

  AlphaPca out{StiefelPoint(std::move(basis)), std::nullopt, spectrum};
  if (n < big_n && spectrum(n - 1) - spectrum(n) < 1e-12) {
    out.warning = "eigenvalues " + std::to_string(n) + " and " +
                  std::to_string(n + 1) +
                  " are tied; the leading subspace is not unique";
  }
  return out;
}

RansacResult ransac_init(const FrameDataset& data, Eigen::Index n,
                         const RansacConfig& config, double tol) {
  config.validate();
  if (data.empty()) throw InvalidArgument("ransac_init needs a nonempty dataset");

  std::vector<std::size_t> current(data.size());
  std::iota(current.begin(), current.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, {0x72616e736163ULL}));

  std::optional<Embedding> alpha;
  int round = 0;
  bool converged = false;
  while (round < config.max_rounds) {
    ++round;
    std::vector<std::size_t> sample = current;
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(
               config.keep_fraction * static_cast<double>(current.size()))));
    if (take < sample.size()) {
      for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.below(sample.size() - i);
        std::swap(sample[i], sample[j]);
      }
      sample.resize(take);
      std::sort(sample.begin(), sample.end());
    }

    const FrameDataset subsample = data.subset(sample);
    alpha = alpha_pca(subsample, n).alpha;
    const std::vector<ProjectionOutcome> outcomes =
        project_batch(*alpha, subsample, tol);

    double sum = 0.0;
    std::size_t count = 0;
    for (const ProjectionOutcome& o : outcomes) {
      if (o.in_domain) {
        sum += o.residual;
        ++count;
      }
    }
    const double mean = count ? sum / static_cast<double>(count) : 0.0;
    double sq = 0.0;
    for (const ProjectionOutcome& o : outcomes) {
      if (o.in_domain) sq += (o.residual - mean) * (o.residual - mean);
    }
    const double stddev = count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
    const double cutoff = mean + config.outlier_threshold * stddev;

    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const double r = outcomes[i].residual;
      if (!outcomes[i].in_domain ||
          (r > cutoff && r - mean > config.residual_floor)) {
        flagged.push_back(sample[i]);
      }
    }
    if (flagged.empty()) {
      converged = true;
      break;
    }
    std::vector<std::size_t> next;
    std::set_difference(current.begin(), current.end(), flagged.begin(),
                        flagged.end(), std::back_inserter(next));
    current = std::move(next);
    if (current.empty()) {
      throw EmptySurvivors("RANSAC removed every data point");
    }
  }

  RansacResult out{*alpha, current, {}, round, converged};
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::set_difference(all.begin(), all.end(), current.begin(), current.end(),
                      std::back_inserter(out.removed));
  return out;
}

GdResult gradient_ascent(const FrameDataset& data, const Embedding& init,
                         const GdConfig& config, double tol) {
  config.validate();
  require_fit_shapes(data, init);
  if (data.empty()) throw InvalidArgument("gradient ascent on empty dataset");

  const Eigen::Index k = data.frame_size();
  const Matrix stacked = data.concatenated();

  Matrix alpha = init.matrix();
  Evaluation ev = evaluate(alpha, stacked, k);
  if (!(ev.sigma_min > tol)) throw DomainError(ev.sigma_min);
  Matrix grad = riemannian_direction(alpha, ev.euclidean_grad);
  double grad_norm = grad.norm();

  GdResult out{init, {}, GdStatus::kIterationBudget};
  out.trace.push_back({0, ev.cost, grad_norm, 0.0});

  // Each line search opens at twice the last accepted step.
  double trial = config.initial_step;
  bool stopped = false;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (grad_norm < config.grad_tol) {
      out.status = GdStatus::kGradientTolerance;
      stopped = true;
      break;
    }
    const double slope = config.armijo_slope * grad_norm * grad_norm;
    double step = trial;
    bool accepted = false;
    Matrix candidate;
    Evaluation cand_ev;
    while (step >= config.min_step) {
      try {
        candidate = polar_factor(alpha + step * grad);
      } catch (const RankDeficiency&) {
        step *= config.armijo_shrink;
        continue;
      }
      cand_ev = evaluate(candidate, stacked, k);
      if (cand_ev.sigma_min > tol && cand_ev.cost >= ev.cost + step * slope) {
        accepted = true;
        break;
      }
      step *= config.armijo_shrink;
    }
    if (!accepted) {
      out.status = GdStatus::kStepTolerance;
      stopped = true;
      break;
    }
    alpha = std::move(candidate);
    ev = std::move(cand_ev);
    grad = riemannian_direction(alpha, ev.euclidean_grad);
    grad_norm = grad.norm();
    out.trace.push_back({iter, ev.cost, grad_norm, step});
    trial = 2.0 * step;
  }
  if (!stopped && grad_norm < config.grad_tol) {
    out.status = GdStatus::kGradientTolerance;
  }
  out.alpha = StiefelPoint(std::move(alpha));
  return out;
}

}  // namespace psc
