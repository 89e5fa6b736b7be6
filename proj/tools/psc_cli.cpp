// psc: command-line front end for generating Stiefel-valued datasets, fitting
// Principal Stiefel Coordinates, evaluating fits and rerunning experiments.
//
// Exit status: 0 success, 1 unexpected failure, 2 usage or input error,
// 3 fit succeeded but points were removed, 4 every point was removed,
// 5 a statistic is undefined for the given data.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "psc/datagen.hpp"
#include "psc/errors.hpp"
#include "psc/eval.hpp"
#include "psc/experiments.hpp"
#include "psc/io.hpp"

namespace {

using namespace psc;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRemoval = 3;
constexpr int kExitEmpty = 4;
constexpr int kExitDegenerate = 5;

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::uint64_t seed = 0;
  std::string out;
  std::string truth;

  // noisy-embed
  long big_n = 3;
  long n = 2;
  long k = 1;
  std::size_t count = 100;
  double eps = 0.0;

  // stimulus
  int neurons = 100;
  std::size_t steps = 13000;
  double step_std = 0.01;
  double slope_min = 25.0;
  double slope_max = 50.0;

  // bundles
  int charts = 0;
  std::string mode = "uniform";
  int p = 1;
  int q = 1;
};

int generate_noisy(const GenerateArgs& a) {
  NoisyEmbedConfig c;
  c.ambient_dim = a.big_n;
  c.target_dim = a.n;
  c.frame_size = a.k;
  c.count = a.count;
  c.epsilon = a.eps;
  c.seed = a.seed;
  const NoisyEmbedData d = generate_noisy_embedded(c);
  write_dataset(a.out, d.data);
  if (!a.truth.empty()) {
    FrameDataset alpha(d.alpha.rows(), d.alpha.cols(), "alpha");
    alpha.add(d.alpha);
    write_dataset(a.truth, alpha);
  }
  return kExitOk;
}

int generate_stimulus(const GenerateArgs& a) {
  StimulusConfig c;
  c.neuron_count = a.neurons;
  c.walk_length = a.steps;
  c.walk_step_std = a.step_std;
  c.slope_min = a.slope_min;
  c.slope_max = a.slope_max;
  c.seed = a.seed;
  const StimulusData d = generate_stimulus_walk(c);
  write_dataset(a.out, preprocess_responses(d.responses));
  if (!a.truth.empty()) write_table(a.truth, column_table("truth", d.truth));
  return kExitOk;
}

int generate_mobius(const GenerateArgs& a) {
  BundleConfig c;
  c.chart_count = a.charts > 0 ? a.charts : 25;
  c.sample_count = a.count;
  c.seed = a.seed;
  const MobiusData d = mobius_lift(c);
  write_dataset(a.out, d.data);
  if (!a.truth.empty()) write_table(a.truth, column_table("b", d.truth));
  return kExitOk;
}

int generate_torus(const GenerateArgs& a) {
  BundleConfig c;
  c.chart_count = a.charts > 0 ? a.charts : 10;
  c.sample_count = a.count;
  c.seed = a.seed;
  if (a.mode == "pq") {
    c.mode = BundleSampling::kPqCurve;
    c.p = a.p;
    c.q = a.q;
  }
  const TorusData d = torus_whitney_lift(c);
  write_dataset(a.out, d.data);
  if (!a.truth.empty()) {
    Table t{{"b1", "b2"}, {}};
    for (const auto& b : d.truth) t.rows.push_back({b[0], b[1]});
    write_table(a.truth, t);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data;
  long n = 0;
  std::uint64_t seed = 0;
  bool renormalize = false;
  std::string report;
  std::string low_dim;
  int max_iters = GdConfig{}.max_iters;
  double grad_tol = GdConfig{}.grad_tol;
  double initial_step = GdConfig{}.initial_step;
  bool ransac = false;
  double ransac_keep = RansacConfig{}.keep_fraction;
  double ransac_threshold = RansacConfig{}.outlier_threshold;
  int ransac_rounds = RansacConfig{}.max_rounds;
  std::string pca_variant = "eig";
};

int run_fit(const FitArgs& a) {
  const FrameDataset data = read_dataset(a.data, a.renormalize);
  FitOptions options;
  options.seed = a.seed;
  options.gd.max_iters = a.max_iters;
  options.gd.grad_tol = a.grad_tol;
  options.gd.initial_step = a.initial_step;
  options.pca_variant =
      a.pca_variant == "concat-svd" ? PcaVariant::kConcatSvd : PcaVariant::kEig;
  if (a.ransac) {
    RansacConfig r;
    r.keep_fraction = a.ransac_keep;
    r.outlier_threshold = a.ransac_threshold;
    r.max_rounds = a.ransac_rounds;
    r.seed = a.seed;
    options.ransac = r;
  }
  const FitReport report = psc_fit(data, a.n, options);
  if (!a.report.empty()) write_report(a.report, report);
  if (!a.low_dim.empty()) write_dataset(a.low_dim, recover_low_dim(report));

  std::cout << "cost_pca " << format_double(report.cost_pca) << '\n'
            << "cost_gd " << format_double(report.cost_gd) << '\n'
            << "mse " << format_double(report.mse) << '\n'
            << "iterations " << report.cost_trace.size() - 1 << " ("
            << to_string(report.gd_status) << ")\n"
            << "survivors " << report.survivors.size() << " of "
            << report.input_count << '\n';
  for (const FitWarning& w : report.warnings) {
    std::cerr << "warning: " << w.message << '\n';
  }
  return report.has_removals() ? kExitRemoval : kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string data;
  std::string report;
  std::string low_dim;
  std::string truth;
  std::string alpha;
  std::string out;
  std::string a;
  std::string b;
  bool renormalize = false;
  int theta_res = 121;
  int phi_res = 31;
  double sigma = 100.0;
  int clusters = 2;
  int restarts = 10;
  std::uint64_t seed = 0;
};

int eval_mse(const EvalArgs& a) {
  const ReportRecord r = read_report(a.report);
  if (r.residuals.empty()) throw EmptySurvivors("report has no survivors");
  double total = 0.0;
  for (double x : r.residuals) total += x * x;
  emit(a.out, format_double(total / static_cast<double>(r.residuals.size())) +
                  "\n");
  return kExitOk;
}

int eval_variance_ratio(const EvalArgs& a) {
  const FrameDataset data = read_dataset(a.data, a.renormalize);
  const FitReport report = rebuild_report(read_report(a.report), data);
  emit(a.out, format_double(variance_ratio(report, data)) + "\n");
  return kExitOk;
}

int eval_spectrum(const EvalArgs& a) {
  const Vector s = spectrum(read_dataset(a.data, a.renormalize));
  Table t{{"index", "eigenvalue"}, {}};
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    t.rows.push_back({static_cast<double>(i + 1), s(i)});
  }
  emit(a.out, serialize_table(t));
  return kExitOk;
}

int eval_landscape(const EvalArgs& a) {
  const FrameDataset data = read_dataset(a.data, a.renormalize);
  std::vector<LandscapeMarker> markers;
  if (!a.alpha.empty()) {
    const FrameDataset alpha = read_dataset(a.alpha);
    if (alpha.size() != 1) throw InvalidArgument("--alpha must hold one point");
    markers.push_back(plane_marker("alpha_true", alpha[0]));
  }
  if (!a.report.empty()) {
    const ReportRecord r = read_report(a.report);
    markers.push_back(plane_marker("alpha_pca", StiefelPoint(r.alpha_pca)));
    markers.push_back(plane_marker("alpha_gd", StiefelPoint(r.alpha_gd)));
  }
  const LandscapeGrid grid = landscape(data, a.theta_res, a.phi_res, markers);
  std::string text = "kind,name,theta,phi,cost\n";
  for (const LandscapeCell& c : grid.cells) {
    text += "cell,," + format_double(c.theta) + ',' + format_double(c.phi) +
            ',' + format_double(c.cost) + '\n';
  }
  for (const LandscapeMarker& m : grid.markers) {
    text += "marker," + m.name + ',' + format_double(m.theta) + ',' +
            format_double(m.phi) + ",\n";
  }
  emit(a.out, text);
  return kExitOk;
}

int eval_path(const EvalArgs& a) {
  const FrameDataset low = read_dataset(a.low_dim, a.renormalize);
  const std::vector<double> truth = first_column(read_table(a.truth));
  const PathRecovery p = recover_path(low, truth, a.sigma);
  Table t{{"t", "truth", "raw", "grassmann", "aligned", "smoothed",
           "smoothed_truth"},
          {}};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    t.rows.push_back({static_cast<double>(i), truth[i], p.raw[i],
                      p.grassmann[i], p.aligned[i], p.smoothed[i],
                      p.smoothed_truth[i]});
  }
  emit(a.out, serialize_table(t));
  std::cerr << "mse " << format_double(p.mse) << '\n';
  return kExitOk;
}

int eval_kmeans(const EvalArgs& a) {
  KMeansConfig c;
  c.cluster_count = a.clusters;
  c.restarts = a.restarts;
  c.seed = a.seed;
  const KMeansResult r = kmeans_stiefel(read_dataset(a.data, a.renormalize), c);
  std::string text = "label\n";
  for (int l : r.labels) text += std::to_string(l) + '\n';
  emit(a.out, text);
  std::cerr << "objective " << format_double(r.objective) << '\n';
  return kExitOk;
}

int eval_ari(const EvalArgs& a) {
  emit(a.out, format_double(adjusted_rand_index(read_labels(a.a),
                                                read_labels(a.b))) +
                  "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceArgs {
  std::uint64_t seed = 1;
  std::string out;
  int trials = 0;
};

int run_reproduce(const std::string& experiment, const ReproduceArgs& a) {
  ExperimentOptions o;
  o.seed = a.seed;
  o.trials = a.trials;
  o.out_dir = a.out.empty() ? std::filesystem::path("psc-" + experiment)
                            : std::filesystem::path(a.out);
  std::string summary;
  if (experiment == "circle") {
    summary = run_circle(o).summary;
  } else if (experiment == "variance") {
    summary = run_variance(o).summary;
  } else if (experiment == "stimulus") {
    summary = run_stimulus(o).summary;
  } else if (experiment == "mobius") {
    summary = run_mobius(o).summary;
  } else {
    summary = run_torus(o).summary;
  }
  std::cout << summary;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal Stiefel Coordinates"};
  app.require_subcommand(1);

  // generate
  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic dataset");
  generate->require_subcommand(1);
  auto common_gen = [&gen](CLI::App* sub) {
    sub->add_option("--seed", gen.seed, "Random seed")->required();
    sub->add_option("--out", gen.out, "Dataset file")->required();
    sub->add_option("--truth", gen.truth, "Ground-truth sidecar file");
  };
  CLI::App* g_noisy = generate->add_subcommand(
      "noisy-embed", "Noisy frames near a linearly embedded Stiefel manifold");
  common_gen(g_noisy);
  g_noisy->add_option("--N", gen.big_n, "Ambient dimension")->check(CLI::PositiveNumber);
  g_noisy->add_option("--n", gen.n, "Embedded dimension")->check(CLI::PositiveNumber);
  g_noisy->add_option("--k", gen.k, "Frame size")->check(CLI::PositiveNumber);
  g_noisy->add_option("--count", gen.count, "Number of points");
  g_noisy->add_option("--eps", gen.eps, "Noise level")->check(CLI::NonNegativeNumber);

  CLI::App* g_stim = generate->add_subcommand(
      "stimulus", "Tent-tuned population driven by a reflected random walk");
  common_gen(g_stim);
  g_stim->add_option("--neurons", gen.neurons, "Number of neurons");
  g_stim->add_option("--steps", gen.steps, "Walk length");
  g_stim->add_option("--step-std", gen.step_std, "Walk increment std (radians)");
  g_stim->add_option("--slope-min", gen.slope_min, "Smallest tuning slope");
  g_stim->add_option("--slope-max", gen.slope_max, "Largest tuning slope");

  CLI::App* g_mobius =
      generate->add_subcommand("mobius", "Lift of the Mobius line bundle");
  common_gen(g_mobius);
  g_mobius->add_option("--charts", gen.charts, "Chart count J (default 25)");
  g_mobius->add_option("--count", gen.count, "Number of samples");

  CLI::App* g_torus = generate->add_subcommand(
      "torus", "Lift of the Whitney sum of two Mobius bundles over the torus");
  common_gen(g_torus);
  g_torus->add_option("--charts", gen.charts, "Charts per factor (default 10)");
  g_torus->add_option("--count", gen.count, "Number of samples");
  g_torus->add_option("--mode", gen.mode, "uniform or pq")
      ->check(CLI::IsMember({"uniform", "pq"}));
  g_torus->add_option("--p", gen.p, "Winding number of the first factor");
  g_torus->add_option("--q", gen.q, "Winding number of the second factor");

  // fit
  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit Principal Stiefel Coordinates");
  fit_cmd->add_option("data", fit.data, "Dataset file")->required();
  fit_cmd->add_option("--n", fit.n, "Target dimension")
      ->required()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "Random seed (RANSAC sampling)");
  fit_cmd->add_flag("--renormalize", fit.renormalize,
                    "Polar-project rows that are not exactly orthonormal");
  fit_cmd->add_option("--report", fit.report, "Report file (JSON)");
  fit_cmd->add_option("--low-dim", fit.low_dim, "Recovered coordinates file");
  fit_cmd->add_option("--max-iters", fit.max_iters, "Gradient ascent iteration budget")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--grad-tol", fit.grad_tol, "Gradient norm tolerance")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--initial-step", fit.initial_step, "First trial step")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--ransac", fit.ransac, "Screen outliers before the warm start");
  fit_cmd->add_option("--ransac-keep", fit.ransac_keep, "Fraction sampled per round")
      ->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--ransac-threshold", fit.ransac_threshold,
                      "Outlier cutoff in standard deviations")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--ransac-rounds", fit.ransac_rounds, "Maximum RANSAC rounds")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--pca-variant", fit.pca_variant, "eig or concat-svd")
      ->check(CLI::IsMember({"eig", "concat-svd"}));

  // eval
  EvalArgs ev;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate datasets and fits");
  eval->require_subcommand(1);
  auto out_opt = [&ev](CLI::App* sub) {
    sub->add_option("--out", ev.out, "Output file (default stdout)");
  };
  CLI::App* e_mse = eval->add_subcommand("mse", "Mean squared projection residual");
  e_mse->add_option("--report", ev.report, "Report file")->required();
  out_opt(e_mse);
  CLI::App* e_var = eval->add_subcommand("variance-ratio",
                                         "Frechet variance of projections over data");
  e_var->add_option("--report", ev.report, "Report file")->required();
  e_var->add_option("--data", ev.data, "Dataset the report was fitted on")->required();
  out_opt(e_var);
  CLI::App* e_spec = eval->add_subcommand("spectrum", "Second-moment eigenvalues");
  e_spec->add_option("--data", ev.data, "Dataset file")->required();
  out_opt(e_spec);
  CLI::App* e_land = eval->add_subcommand("landscape", "Cost over planes in R^3");
  e_land->add_option("--data", ev.data, "Dataset file (N = 3, k = 1)")->required();
  e_land->add_option("--report", ev.report, "Adds alpha_PCA and alpha_GD markers");
  e_land->add_option("--alpha", ev.alpha, "Adds a marker for a generating alpha");
  e_land->add_option("--theta-res", ev.theta_res, "Azimuth grid size")
      ->check(CLI::Range(2, 100000));
  e_land->add_option("--phi-res", ev.phi_res, "Inclination grid size")
      ->check(CLI::Range(2, 100000));
  out_opt(e_land);
  CLI::App* e_path = eval->add_subcommand("path", "Circular coordinate recovery");
  e_path->add_option("--low-dim", ev.low_dim, "V_1(R^2) coordinates")->required();
  e_path->add_option("--truth", ev.truth, "Truth angle CSV")->required();
  e_path->add_option("--sigma", ev.sigma, "Smoothing width in samples")
      ->check(CLI::NonNegativeNumber);
  out_opt(e_path);
  CLI::App* e_km = eval->add_subcommand("kmeans", "k-means with polar-factor centroids");
  e_km->add_option("--data", ev.data, "Dataset file")->required();
  e_km->add_option("--clusters", ev.clusters, "Number of clusters")
      ->check(CLI::PositiveNumber);
  e_km->add_option("--restarts", ev.restarts, "Seeded restarts")
      ->check(CLI::PositiveNumber);
  e_km->add_option("--seed", ev.seed, "Random seed");
  out_opt(e_km);
  CLI::App* e_ari = eval->add_subcommand("ari", "Adjusted Rand index");
  e_ari->add_option("--a", ev.a, "First label CSV")->required();
  e_ari->add_option("--b", ev.b, "Second label CSV")->required();
  out_opt(e_ari);
  for (CLI::App* sub : {e_var, e_spec, e_land, e_path, e_km}) {
    sub->add_flag("--renormalize", ev.renormalize,
                  "Polar-project rows that are not exactly orthonormal");
  }

  // reproduce
  ReproduceArgs rep;
  std::string experiment;
  CLI::App* reproduce =
      app.add_subcommand("reproduce", "Run a synthetic experiment end to end");
  reproduce->add_option("experiment", experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"circle", "variance", "stimulus", "mobius", "torus"}));
  reproduce->add_option("--seed", rep.seed, "Random seed");
  reproduce->add_option("--out", rep.out, "Output directory (default psc-<name>)");
  reproduce->add_option("--trials", rep.trials, "Trial count override")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*generate) {
      if (*g_noisy) return generate_noisy(gen);
      if (*g_stim) return generate_stimulus(gen);
      if (*g_mobius) return generate_mobius(gen);
      return generate_torus(gen);
    }
    if (*fit_cmd) return run_fit(fit);
    if (*eval) {
      if (*e_mse) return eval_mse(ev);
      if (*e_var) return eval_variance_ratio(ev);
      if (*e_spec) return eval_spectrum(ev);
      if (*e_land) return eval_landscape(ev);
      if (*e_path) return eval_path(ev);
      if (*e_km) return eval_kmeans(ev);
      return eval_ari(ev);
    }
    return run_reproduce(experiment, rep);
  } catch (const EmptySurvivors& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const DegenerateMean& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const DegenerateStatistic& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ShapeMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
