// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "psc/datagen.hpp"
#include "psc/eval.hpp"
#include "psc/experiments.hpp"
#include "psc/fit.hpp"
#include "psc/io.hpp"
#include "psc/pipeline.hpp"
#include "psc/projection.hpp"
#include "psc/random.hpp"
#include "psc/stiefel.hpp"
#include "../support.hpp"

#ifndef PSC_CLI_PATH
#error "PSC_CLI_PATH must name the psc executable"
#endif

namespace {

using namespace psc;
using psc::testing::kPi;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failure notes; the first few are reported.
class Checker {
 public:
  void require(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome done(const std::string& summary) const {
    Outcome o;
    o.pass = failures_ == 0;
    o.detail = summary;
    if (!o.pass) {
      o.detail += " | " + std::to_string(failures_) + " failure(s): " + notes_;
    }
    return o;
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

NoisyEmbedData noisy(Eigen::Index big_n, Eigen::Index n, Eigen::Index k,
                     std::size_t count, double eps, std::uint64_t seed) {
  NoisyEmbedConfig c;
  c.ambient_dim = big_n;
  c.target_dim = n;
  c.frame_size = k;
  c.count = count;
  c.epsilon = eps;
  c.seed = seed;
  return generate_noisy_embedded(c);
}

double cost_identity_gap(const FitReport& r) {
  return std::abs(r.mse - (2.0 * static_cast<double>(r.frame_size) - 2.0 * r.cost_gd));
}

// ---------------------------------------------------------------------------

Outcome equivariance() {
  Checker c;
  Rng rng(1001);
  double worst = 0.0;
  int evaluated = 0;
  for (int trial = 0; evaluated < 200; ++trial) {
    const auto big_n = static_cast<Eigen::Index>(2 + rng.below(29));
    const auto n = static_cast<Eigen::Index>(1 + rng.below(big_n));
    const auto k = static_cast<Eigen::Index>(1 + rng.below(n));
    const Embedding alpha = uniform_stiefel(big_n, n, derive_seed(1, {std::uint64_t(trial), 0}));
    const StiefelPoint y = uniform_stiefel(big_n, k, derive_seed(1, {std::uint64_t(trial), 1}));
    if (!domain_check(alpha, y).in_domain) continue;
    const Matrix g = uniform_orthogonal(k, derive_seed(1, {std::uint64_t(trial), 2}));
    const ProjectionOutcome a = project(alpha, y);
    const ProjectionOutcome b = project(alpha, StiefelPoint(y.matrix() * g));
    const double err = (b.projected->matrix() - a.projected->matrix() * g).norm();
    worst = std::max(worst, err);
    c.require(err <= 1e-9, "config " + std::to_string(trial) + " err " + num(err));
    ++evaluated;
  }
  return c.done("200 configurations, max error " + num(worst));
}

Outcome distance_minimality() {
  Checker c;
  double worst = 0.0;
  for (Eigen::Index big_n : {3, 5, 10}) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const Embedding alpha = uniform_stiefel(big_n, 2, derive_seed(2, {std::uint64_t(big_n), s, 0}));
      const StiefelPoint y = uniform_stiefel(big_n, 1, derive_seed(2, {std::uint64_t(big_n), s, 1}));
      const ProjectionOutcome o = project(alpha, y);
      const double brute =
          psc::testing::circle_brute_force_residual(alpha.matrix(), y.matrix(), 100000);
      const double err = std::abs(o.residual - brute);
      worst = std::max(worst, err);
      c.require(err <= 1e-4, "N=" + std::to_string(big_n) + " err " + num(err));
    }
  }
  return c.done("150 cases, max |residual - brute force| " + num(worst));
}

Outcome complement_distance() {
  Checker c;
  double worst = 0.0;
  for (Eigen::Index k = 1; k <= 3; ++k) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Eigen::Index big_n = 9;
      const Eigen::Index n = 4;
      const Embedding alpha = uniform_stiefel(big_n, n, derive_seed(3, {std::uint64_t(k), s}));
      const Matrix perp = orthogonal_complement(alpha.matrix());
      const Matrix rot = uniform_orthogonal(perp.cols(), derive_seed(4, {std::uint64_t(k), s}));
      const Matrix y = (perp * rot).leftCols(k);
      const StiefelPoint x = uniform_stiefel(n, k, derive_seed(5, {std::uint64_t(k), s}));
      const double d = (y - alpha.matrix() * x.matrix()).norm();
      const double err = std::abs(d - std::sqrt(2.0 * static_cast<double>(k)));
      worst = std::max(worst, err);
      c.require(err <= 1e-10, "k=" + std::to_string(k) + " err " + num(err));
    }
  }
  return c.done("k in {1,2,3}, max error " + num(worst));
}

Outcome noiseless_optimality() {
  Checker c;
  double worst_grad = 0.0;
  double worst_mse = 0.0;
  for (Eigen::Index k = 1; k <= 2; ++k) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const NoisyEmbedData d = noisy(11, 6, k, 100, 0.0, derive_seed(seed, {std::uint64_t(k)}));
      const std::string tag = "k=" + std::to_string(k) + " seed=" + std::to_string(seed);
      const AlphaPca pca = alpha_pca(d.data, 6);
      const double cost_pca = cost(pca.alpha, d.data);
      c.require(std::abs(cost_pca - static_cast<double>(k)) <= 1e-8,
                tag + " cost " + num(cost_pca));
      const double grad = riemannian_gradient(pca.alpha, d.data).direction.norm();
      worst_grad = std::max(worst_grad, grad);
      c.require(grad <= 1e-8, tag + " grad " + num(grad));
      const GdResult gd = gradient_ascent(d.data, pca.alpha);
      const double gain = gd.trace.back().cost - gd.trace.front().cost;
      c.require(gain <= 1e-8, tag + " gain " + num(gain));
      const FitReport r = psc_fit(d.data, 6);
      worst_mse = std::max(worst_mse, r.mse);
      c.require(r.mse <= 1e-12, tag + " mse " + num(r.mse));
    }
  }
  return c.done("40 datasets, max grad " + num(worst_grad) + ", max mse " + num(worst_mse));
}

Outcome gradient_correctness() {
  Checker c;
  double worst = 0.0;
  int evaluated = 0;
  for (std::uint64_t s = 0; evaluated < 20; ++s) {
    const Eigen::Index big_n = 6 + static_cast<Eigen::Index>(s % 5);
    const Eigen::Index n = 3;
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(s % 2);
    const NoisyEmbedData d = noisy(big_n, n, k, 40, 0.6, derive_seed(6, {s}));
    // A perturbed warm start keeps the gradient away from zero.
    Rng rng(derive_seed(7, {s}));
    const Matrix bump = psc::testing::random_matrix(big_n, n, rng);
    const Embedding alpha =
        StiefelPoint::renormalize(alpha_pca(d.data, n).alpha.matrix() + 0.3 * bump);
    double sigma = std::numeric_limits<double>::infinity();
    for (const StiefelPoint& y : d.data.points()) {
      sigma = std::min(sigma, domain_check(alpha, y).sigma_min);
    }
    if (sigma < 0.05) continue;
    ++evaluated;

    const Matrix grad = riemannian_gradient(alpha, d.data).direction;
    const Matrix r = tangent_project(alpha, psc::testing::random_matrix(big_n, n, rng)).direction;
    const Matrix xi = grad + 0.5 * grad.norm() * r / r.norm();
    const double exact = (grad.transpose() * xi).trace();
    const double h = 1e-5;
    const double fd = (cost(retract(alpha, h * xi), d.data) -
                       cost(retract(alpha, -h * xi), d.data)) /
                      (2.0 * h);
    const double rel = std::abs(fd - exact) / std::abs(exact);
    worst = std::max(worst, rel);
    c.require(rel <= 1e-4, "config " + std::to_string(s) + " rel " + num(rel));
  }
  return c.done("20 configurations, max relative error " + num(worst));
}

Outcome cost_identity() {
  Checker c;
  double worst = 0.0;
  int runs = 0;
  auto check = [&](const FitReport& r, const std::string& tag) {
    const double gap = cost_identity_gap(r);
    worst = std::max(worst, gap);
    c.require(gap <= 1e-8, tag + " gap " + num(gap));
    ++runs;
  };
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng(derive_seed(8, {s}));
    const auto k = static_cast<Eigen::Index>(1 + rng.below(3));
    const auto n = k + static_cast<Eigen::Index>(rng.below(4));
    const auto big_n = n + 1 + static_cast<Eigen::Index>(rng.below(8));
    const double eps = rng.uniform(0.0, 1.5);
    const NoisyEmbedData d = noisy(big_n, n, k, 60, eps, derive_seed(9, {s}));
    FitOptions o;
    if (s % 3 == 0) {
      o.ransac = RansacConfig{};
      o.ransac->seed = s;
      o.ransac->keep_fraction = 0.9;
    }
    if (s % 4 == 1) o.pca_variant = PcaVariant::kConcatSvd;
    check(psc_fit(d.data, n, o), "run " + std::to_string(s));
  }
  for (std::uint64_t s = 0; s < 5; ++s) {
    BundleConfig b;
    b.sample_count = 300;
    b.seed = s;
    check(psc_fit(mobius_lift(b).data, 2), "mobius " + std::to_string(s));
    b.mode = BundleSampling::kPqCurve;
    b.q = 15;
    b.chart_count = 10;
    check(psc_fit(torus_whitney_lift(b).data, 2), "torus " + std::to_string(s));
  }
  return c.done(std::to_string(runs) + " fits, max |mse - (2k - 2 cost)| " + num(worst));
}

Outcome circle_experiment() {
  Checker c;
  double worst_angle_cells = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ExperimentOptions o;
    o.seed = seed;
    const CircleResult r = run_circle(o);
    const std::string tag = "seed " + std::to_string(seed);
    c.require(r.cost_gd >= r.cost_pca, tag + " cost_gd < cost_pca");
    const LandscapeCell& top = r.grid.max_cell();
    c.require(top.cost <= 1.0 + 1e-8, tag + " grid max " + num(top.cost));
    const auto gd = std::find_if(r.grid.markers.begin(), r.grid.markers.end(),
                                 [](const LandscapeMarker& m) { return m.name == "alpha_gd"; });
    if (gd == r.grid.markers.end()) {
      c.require(false, tag + " missing alpha_gd marker");
      continue;
    }
    const double angle = normal_line_angle(top.theta, top.phi, gd->theta, gd->phi);
    const double cells = angle / r.grid.spacing();
    worst_angle_cells = std::max(worst_angle_cells, cells);
    c.require(cells <= 2.0, tag + " top cell " + num(cells) + " cells from alpha_gd");
  }
  return c.done("20 seeds, farthest top cell " + num(worst_angle_cells) + " cells from alpha_gd");
}

Outcome stimulus_experiment() {
  Checker c;
  std::string values;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentOptions o;
    o.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    const StimulusResult r = run_stimulus(o);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string tag = "seed " + std::to_string(seed);
    values += (values.empty() ? "" : ", ") + num(r.path_mse_gd) + "/" + num(r.path_mse_pca);
    c.require(r.path_mse_gd <= 0.1, tag + " gd path mse " + num(r.path_mse_gd));
    c.require(r.path_mse_gd < r.path_mse_pca,
              tag + " gd " + num(r.path_mse_gd) + " >= pca " + num(r.path_mse_pca));
    c.require(secs < 300.0, tag + " took " + num(secs) + " s");
  }
  return c.done("path mse gd/pca per seed: " + values);
}

Outcome mobius_study() {
  Checker c;
  ExperimentOptions o;
  o.seed = 1;
  o.trials = 10;
  const MobiusResult r = run_mobius(o);
  double mean_pca = 0.0;
  double mean_gd = 0.0;
  for (std::size_t i = 0; i < r.comparison.mse_gd.size(); ++i) {
    mean_pca += r.comparison.mse_pca[i];
    mean_gd += r.comparison.mse_gd[i];
  }
  mean_pca /= static_cast<double>(r.comparison.mse_pca.size());
  mean_gd /= static_cast<double>(r.comparison.mse_gd.size());
  c.require(r.comparison.mse_gd.size() == 10, "expected 10 trials");
  c.require(mean_gd < mean_pca, "mean gd " + num(mean_gd) + " >= mean pca " + num(mean_pca));
  c.require(r.comparison.test.p_value < 0.05, "p " + num(r.comparison.test.p_value));
  return c.done("mean mse gd " + num(mean_gd) + " vs pca " + num(mean_pca) + ", p " +
                num(r.comparison.test.p_value));
}

Outcome torus_study() {
  Checker c;
  ExperimentOptions o;
  o.seed = 1;
  o.trials = 5;
  const TorusResult r = run_torus(o);
  std::string detail;
  for (const auto& [name, cmp] :
       {std::pair<std::string, const PairedComparison*>{"(1,1)", &r.curve_1_1},
        std::pair<std::string, const PairedComparison*>{"(1,15)", &r.curve_1_15}}) {
    c.require(cmp->mse_gd.size() == 5, name + " expected 5 trials");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < cmp->mse_gd.size(); ++t) {
      const double diff = cmp->mse_gd[t] - cmp->mse_pca[t];
      worst = std::max(worst, diff);
      c.require(diff < 0.0, name + " trial " + std::to_string(t) + " gd - pca " + num(diff));
    }
    detail += (detail.empty() ? "" : ", ") + name + " max(gd - pca) " + num(worst);
  }
  return c.done(detail);
}

Outcome frechet_oracle() {
  Checker c;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    FrameDataset points(2, 1);
    Rng rng(derive_seed(10, {s}));
    const double centre = rng.uniform(-kPi, kPi);
    for (int i = 0; i < 25; ++i) {
      const double t = centre + rng.uniform(-1.2, 1.2);
      points.add(StiefelPoint((Matrix(2, 1) << std::cos(t), std::sin(t)).finished()));
    }
    const StiefelPoint mean = frechet_mean(points);
    const double angle = std::atan2(mean.matrix()(1, 0), mean.matrix()(0, 0));
    const double brute = psc::testing::circle_brute_force_mean_angle(points, 1000000);
    const double gap = psc::testing::angle_gap(angle, brute);
    worst = std::max(worst, gap);
    c.require(gap <= 1e-3, "dataset " + std::to_string(s) + " gap " + num(gap));
  }
  double worst_ratio = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const NoisyEmbedData d = noisy(8, 4, 1 + static_cast<Eigen::Index>(s % 2), 50, 0.0, 20 + s);
    const double ratio = variance_ratio(psc_fit(d.data, 4), d.data);
    worst_ratio = std::max(worst_ratio, std::abs(ratio - 1.0));
    c.require(std::abs(ratio - 1.0) <= 1e-10, "on-image ratio " + num(ratio));
  }
  return c.done("max angular gap " + num(worst) + ", max |ratio - 1| " + num(worst_ratio));
}

Outcome grassmann_well_defined() {
  Checker c;
  const NoisyEmbedData d = noisy(9, 4, 2, 60, 0.5, 1234);
  std::vector<GrassmannPoint> base_points;
  for (const StiefelPoint& y : d.data.points()) base_points.emplace_back(y);
  const GrassmannReduction base = grassmann_reduce(base_points, 4);
  double worst = 0.0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    std::vector<GrassmannPoint> relifted;
    for (std::size_t i = 0; i < d.data.size(); ++i) {
      const Matrix g = uniform_orthogonal(2, derive_seed(100 + r, {i}));
      relifted.emplace_back(StiefelPoint(d.data[i].matrix() * g));
    }
    const GrassmannReduction again = grassmann_reduce(relifted, 4);
    if (again.reduced.size() != base.reduced.size()) {
      c.require(false, "lift " + std::to_string(r) + " changed the survivor count");
      continue;
    }
    for (std::size_t i = 0; i < base.reduced.size(); ++i) {
      const Matrix a = again.report.alpha_gd.matrix();
      const Matrix b = base.report.alpha_gd.matrix();
      const Matrix pa = a * again.reduced[i].projector() * a.transpose();
      const Matrix pb = b * base.reduced[i].projector() * b.transpose();
      const double err = (pa - pb).norm();
      worst = std::max(worst, err);
      c.require(err <= 1e-8, "lift " + std::to_string(r) + " point " + std::to_string(i) +
                                 " err " + num(err));
    }
  }
  return c.done("20 lifts, max projector difference " + num(worst));
}

int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + PSC_CLI_PATH + "' " + args +
                          " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Every regular file under `dir`, relative path to content.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    files.emplace_back(fs::relative(e.path(), dir).string(), read_file(e.path()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism() {
  Checker c;
  const std::vector<std::string> commands = {
      "generate noisy-embed --N 8 --n 3 --k 2 --count 200 --eps 0.7 --seed 5 --out d.csv "
      "--truth alpha.csv",
      "generate stimulus --seed 5 --out s.csv --truth truth.csv",
      "generate mobius --seed 5 --out m.csv --truth mt.csv",
      "generate torus --seed 5 --out t.csv --truth tt.csv",
      "generate torus --mode pq --p 1 --q 15 --seed 5 --out tq.csv --truth tqt.csv",
      "fit d.csv --n 3 --seed 5 --ransac --ransac-keep 0.8 --report fit.json --low-dim low.csv",
      "fit s.csv --n 2 --report sfit.json --low-dim slow.csv",
      "eval kmeans --data d.csv --clusters 4 --seed 5 --out km.csv",
      "eval landscape --data c.csv --theta-res 41 --phi-res 11 --out land.csv",
      "reproduce circle --seed 5 --out rc",
      "reproduce mobius --seed 5 --trials 2 --out rm",
      "reproduce torus --seed 5 --trials 2 --out rt",
  };
  std::vector<std::vector<std::pair<std::string, std::string>>> runs;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = psc::testing::scratch_dir("acceptance-determinism-" + std::to_string(pass));
    if (run_cli("generate noisy-embed --seed 9 --out c.csv --count 80 --eps 0.5", dir) != 0) {
      c.require(false, "setup generate failed");
    }
    for (const std::string& cmd : commands) {
      const int code = run_cli(cmd, dir);
      c.require(code == 0 || code == 3, "'" + cmd + "' exited " + std::to_string(code));
    }
    runs.push_back(snapshot(dir));
  }
  c.require(runs[0].size() == runs[1].size(), "different file sets");
  std::size_t compared = 0;
  for (std::size_t i = 0; i < std::min(runs[0].size(), runs[1].size()); ++i) {
    c.require(runs[0][i].first == runs[1][i].first, "file set differs at " + runs[0][i].first);
    c.require(runs[0][i].second == runs[1][i].second, runs[0][i].first + " differs");
    ++compared;
  }
  return c.done(std::to_string(commands.size()) + " commands, " + std::to_string(compared) +
                " files byte-identical across runs");
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
  double time_limit_seconds;
};

}  // namespace

int main() {
  const double none = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria = {
      {1, "projection equivariance", equivariance, 10.0},
      {2, "distance minimality vs brute force", distance_minimality, 30.0},
      {3, "orthogonal-complement distance", complement_distance, none},
      {4, "noiseless global optimality", noiseless_optimality, none},
      {5, "gradient vs finite differences", gradient_correctness, none},
      {6, "mse = 2k - 2 cost", cost_identity, none},
      {7, "circle experiment", circle_experiment, 120.0},
      {8, "stimulus path recovery", stimulus_experiment, none},
      {9, "Mobius bundle study", mobius_study, 600.0},
      {10, "torus Whitney-sum study", torus_study, none},
      {11, "Frechet mean and variance ratio", frechet_oracle, none},
      {12, "Grassmannian well-definedness", grassmann_well_defined, none},
      {13, "seeded determinism", determinism, none},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.time_limit_seconds) {
      o.pass = false;
      o.detail += " | exceeded " + num(c.time_limit_seconds) + " s";
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " ("
              << o.detail << ", " << num(secs) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
