#include "psc/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "psc/errors.hpp"
#include "psc/io.hpp"
#include "psc/random.hpp"

namespace psc {

namespace {

constexpr std::uint64_t kTrialStream = 0x747269616cULL;

std::string fmt(double v) { return format_double(v); }

void prepare(const ExperimentOptions& options) {
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);
}

void write_text(const ExperimentOptions& options, const std::string& name,
                const std::string& text) {
  if (options.out_dir) write_file_atomic(*options.out_dir / name, text);
}

void write_table_to(const ExperimentOptions& options, const std::string& name,
                    const Table& table) {
  if (options.out_dir) write_table(*options.out_dir / name, table);
}

void write_dataset_to(const ExperimentOptions& options, const std::string& name,
                      const FrameDataset& data) {
  if (options.out_dir) write_dataset(*options.out_dir / name, data);
}

void write_report_to(const ExperimentOptions& options, const std::string& name,
                     const FitReport& report) {
  if (options.out_dir) write_report(*options.out_dir / name, report);
}

FrameDataset single_point(const StiefelPoint& p) {
  FrameDataset d(p.rows(), p.cols());
  d.add(p);
  return d;
}

std::string trial_name(const char* prefix, int trial, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%02d%s", prefix, trial, suffix);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Table paired_table(const PairedComparison& c) {
  Table t{{"trial", "mse_pca", "mse_gd"}, {}};
  for (std::size_t i = 0; i < c.mse_pca.size(); ++i) {
    t.rows.push_back({static_cast<double>(i), c.mse_pca[i], c.mse_gd[i]});
  }
  return t;
}

std::string paired_summary(const std::string& title, const PairedComparison& c) {
  std::ostringstream s;
  s << title << '\n';
  s << "trial,mse_pca,mse_gd\n";
  for (std::size_t i = 0; i < c.mse_pca.size(); ++i) {
    s << i << ',' << fmt(c.mse_pca[i]) << ',' << fmt(c.mse_gd[i]) << '\n';
  }
  s << "mean mse_pca = " << fmt(mean_of(c.mse_pca)) << '\n';
  s << "mean mse_gd  = " << fmt(mean_of(c.mse_gd)) << '\n';
  s << "paired t (gd - pca) = " << fmt(c.test.t_statistic)
    << ", one-sided p = " << fmt(c.test.p_value) << '\n';
  return s.str();
}

double pca_mse(const FitReport& report, const FrameDataset& data) {
  const std::vector<ProjectionOutcome> pca =
      project_batch(report.alpha_pca, data.subset(report.survivors),
                    report.options.rank_tol);
  double total = 0.0;
  for (const ProjectionOutcome& o : pca) total += o.residual * o.residual;
  return total / static_cast<double>(pca.size());
}

void finish_paired(PairedComparison& c) {
  c.test = paired_t_test_less(c.mse_gd, c.mse_pca);
}

}  // namespace

std::pair<double, double> pca_gd_mse(const FrameDataset& data, Eigen::Index n,
                                     const FitOptions& options) {
  const FitReport report = psc_fit(data, n, options);
  return {pca_mse(report, data), report.mse};
}

// ---------------------------------------------------------------------------

CircleResult run_circle(const ExperimentOptions& options,
                        const CircleConfig& config) {
  prepare(options);
  NoisyEmbedConfig gen;
  gen.ambient_dim = 3;
  gen.target_dim = 2;
  gen.frame_size = 1;
  gen.count = config.count;
  gen.epsilon = config.epsilon;
  gen.seed = options.seed;
  const NoisyEmbedData data = generate_noisy_embedded(gen);

  FitOptions fit;
  fit.seed = options.seed;
  const FitReport report = psc_fit(data.data, 2, fit);

  CircleResult out;
  out.cost_true = cost(data.alpha, data.data);
  out.cost_pca = cost(report.alpha_pca, data.data);
  out.cost_gd = cost(report.alpha_gd, data.data);
  out.grid = landscape(data.data, config.theta_resolution,
                       config.phi_resolution,
                       {plane_marker("alpha_true", data.alpha),
                        plane_marker("alpha_pca", report.alpha_pca),
                        plane_marker("alpha_gd", report.alpha_gd)});

  std::ostringstream s;
  s << "circle: N=3 n=2 k=1 count=" << config.count
    << " eps=" << fmt(config.epsilon) << " seed=" << options.seed << '\n';
  s << "cost(alpha_true) = " << fmt(out.cost_true) << '\n';
  s << "cost(alpha_pca)  = " << fmt(out.cost_pca) << '\n';
  s << "cost(alpha_gd)   = " << fmt(out.cost_gd) << '\n';
  s << "landscape max    = " << fmt(out.grid.max_cell().cost) << '\n';
  out.summary = s.str();

  write_dataset_to(options, "data.csv", data.data);
  write_dataset_to(options, "alpha_true.csv", single_point(data.alpha));
  write_report_to(options, "report.json", report);
  Table grid{{"theta", "phi", "cost"}, {}};
  for (const LandscapeCell& c : out.grid.cells) {
    grid.rows.push_back({c.theta, c.phi, c.cost});
  }
  write_table_to(options, "landscape.csv", grid);
  std::string markers = "name,theta,phi\n";
  for (const LandscapeMarker& m : out.grid.markers) {
    markers += m.name + ',' + fmt(m.theta) + ',' + fmt(m.phi) + '\n';
  }
  write_text(options, "markers.csv", markers);
  write_text(options, "summary.txt", out.summary);
  return out;
}

VarianceResult run_variance(const ExperimentOptions& options,
                            const VarianceConfig& config) {
  prepare(options);
  NoisyEmbedConfig gen;
  gen.ambient_dim = config.ambient_dim;
  gen.target_dim = config.generating_dim;
  gen.frame_size = config.frame_size;
  gen.count = config.count;
  gen.epsilon = config.epsilon;
  gen.seed = options.seed;
  const NoisyEmbedData data = generate_noisy_embedded(gen);

  VarianceResult out;
  out.spectrum = spectrum(data.data);
  FitOptions fit;
  fit.seed = options.seed;
  for (Eigen::Index n = config.frame_size; n <= config.ambient_dim; ++n) {
    const FitReport report = psc_fit(data.data, n, fit);
    out.dims.push_back(n);
    try {
      out.ratios.push_back(variance_ratio(report, data.data));
    } catch (const DegenerateMean&) {
      out.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }

  std::ostringstream s;
  s << "variance: N=" << config.ambient_dim << " generating n="
    << config.generating_dim << " k=" << config.frame_size
    << " count=" << config.count << " eps=" << fmt(config.epsilon)
    << " seed=" << options.seed << '\n';
  s << "n,variance_ratio\n";
  Table ratios{{"n", "variance_ratio"}, {}};
  for (std::size_t i = 0; i < out.dims.size(); ++i) {
    if (std::isnan(out.ratios[i])) {
      s << out.dims[i] << ",undefined (Frechet mean not unique)\n";
      continue;
    }
    s << out.dims[i] << ',' << fmt(out.ratios[i]) << '\n';
    ratios.rows.push_back({static_cast<double>(out.dims[i]), out.ratios[i]});
  }
  out.summary = s.str();

  Table spec{{"index", "eigenvalue"}, {}};
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i) {
    spec.rows.push_back({static_cast<double>(i + 1), out.spectrum(i)});
  }
  write_dataset_to(options, "data.csv", data.data);
  write_table_to(options, "variance_ratio.csv", ratios);
  write_table_to(options, "spectrum.csv", spec);
  write_text(options, "summary.txt", out.summary);
  return out;
}

StimulusResult run_stimulus(const ExperimentOptions& options,
                            const StimulusConfig& config) {
  prepare(options);
  StimulusConfig gen = config;
  gen.seed = options.seed;
  const StimulusData walk = generate_stimulus_walk(gen);
  const FrameDataset data = preprocess_responses(walk.responses);

  FitOptions fit;
  fit.seed = options.seed;
  const FitReport report = psc_fit(data, 2, fit);

  // Both paths are read off the same steps: those in the domain of both
  // embeddings.
  const std::vector<ProjectionOutcome> pca = project_batch(report.alpha_pca, data);
  const std::vector<ProjectionOutcome> gd = project_batch(report.alpha_gd, data);
  FrameDataset low_pca(2, 1);
  FrameDataset low_gd(2, 1);
  std::vector<double> truth;
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (!pca[t].in_domain || !gd[t].in_domain) continue;
    low_pca.add(*pca[t].y_hat);
    low_gd.add(*gd[t].y_hat);
    truth.push_back(walk.truth[t]);
  }

  StimulusResult out;
  out.cost_pca = report.cost_pca;
  out.cost_gd = report.cost_gd;
  out.path_pca = recover_path(low_pca, truth);
  out.path_gd = recover_path(low_gd, truth);
  out.path_mse_pca = out.path_pca.mse;
  out.path_mse_gd = out.path_gd.mse;

  std::ostringstream s;
  s << "stimulus: neurons=" << config.neuron_count
    << " steps=" << config.walk_length << " seed=" << options.seed << '\n';
  s << "cost(alpha_pca) = " << fmt(out.cost_pca) << '\n';
  s << "cost(alpha_gd)  = " << fmt(out.cost_gd) << '\n';
  s << "path mse alpha_pca = " << fmt(out.path_mse_pca) << '\n';
  s << "path mse alpha_gd  = " << fmt(out.path_mse_gd) << '\n';
  out.summary = s.str();

  write_dataset_to(options, "data.csv", data);
  write_table_to(options, "truth.csv", column_table("truth", walk.truth));
  write_report_to(options, "report.json", report);
  Table path{{"t", "truth", "smoothed_truth", "pca_raw", "pca_aligned",
              "pca_smoothed", "gd_raw", "gd_aligned", "gd_smoothed"},
             {}};
  for (std::size_t t = 0; t < truth.size(); ++t) {
    path.rows.push_back({static_cast<double>(t), truth[t],
                         out.path_gd.smoothed_truth[t], out.path_pca.raw[t],
                         out.path_pca.aligned[t], out.path_pca.smoothed[t],
                         out.path_gd.raw[t], out.path_gd.aligned[t],
                         out.path_gd.smoothed[t]});
  }
  write_table_to(options, "path.csv", path);
  write_text(options, "summary.txt", out.summary);
  return out;
}

MobiusResult run_mobius(const ExperimentOptions& options,
                        std::size_t sample_count, int chart_count) {
  prepare(options);
  const int trials = options.trials > 0 ? options.trials : 10;
  MobiusResult out;
  for (int t = 0; t < trials; ++t) {
    BundleConfig gen;
    gen.chart_count = chart_count;
    gen.sample_count = sample_count;
    gen.seed = derive_seed(options.seed, {kTrialStream, static_cast<std::uint64_t>(t)});
    const MobiusData data = mobius_lift(gen);
    FitOptions fit;
    fit.seed = gen.seed;
    const FitReport report = psc_fit(data.data, 2, fit);
    out.comparison.mse_pca.push_back(pca_mse(report, data.data));
    out.comparison.mse_gd.push_back(report.mse);
    write_report_to(options, trial_name("trial_", t, "_report.json"), report);
    if (t == 0) {
      write_dataset_to(options, "trial_00_data.csv", data.data);
      write_table_to(options, "trial_00_truth.csv",
                     column_table("b", data.truth));
    }
  }
  finish_paired(out.comparison);
  std::ostringstream title;
  title << "mobius: J=" << chart_count << " count=" << sample_count
        << " n=2 trials=" << trials << " seed=" << options.seed;
  out.summary = paired_summary(title.str(), out.comparison);
  write_table_to(options, "trials.csv", paired_table(out.comparison));
  write_text(options, "summary.txt", out.summary);
  return out;
}

TorusResult run_torus(const ExperimentOptions& options,
                      std::size_t sample_count, int chart_count) {
  prepare(options);
  const int trials = options.trials > 0 ? options.trials : 5;
  TorusResult out;
  std::string summary;
  for (const auto& [p, q] : {std::pair{1, 1}, std::pair{1, 15}}) {
    PairedComparison& c = (q == 1) ? out.curve_1_1 : out.curve_1_15;
    const std::string tag = "curve_" + std::to_string(p) + "_" + std::to_string(q);
    for (int t = 0; t < trials; ++t) {
      BundleConfig gen;
      gen.chart_count = chart_count;
      gen.sample_count = sample_count;
      gen.mode = BundleSampling::kPqCurve;
      gen.p = p;
      gen.q = q;
      gen.seed = derive_seed(options.seed,
                             {kTrialStream, static_cast<std::uint64_t>(q),
                              static_cast<std::uint64_t>(t)});
      const TorusData data = torus_whitney_lift(gen);
      FitOptions fit;
      fit.seed = gen.seed;
      const FitReport report = psc_fit(data.data, 2, fit);
      c.mse_pca.push_back(pca_mse(report, data.data));
      c.mse_gd.push_back(report.mse);
      write_report_to(options, tag + trial_name("_trial_", t, "_report.json"),
                      report);
      if (t == 0) {
        write_dataset_to(options, tag + "_trial_00_data.csv", data.data);
        Table truth{{"t", "b1", "b2"}, {}};
        for (std::size_t i = 0; i < data.truth.size(); ++i) {
          truth.rows.push_back(
              {data.curve_param[i], data.truth[i][0], data.truth[i][1]});
        }
        write_table_to(options, tag + "_trial_00_truth.csv", truth);
      }
    }
    finish_paired(c);
    write_table_to(options, tag + "_trials.csv", paired_table(c));
    std::ostringstream title;
    title << "torus (" << p << "," << q << ")-curve: J=" << chart_count
          << " per factor, count=" << sample_count << " n=2 k=2 trials="
          << trials << " seed=" << options.seed;
    summary += paired_summary(title.str(), c);
  }
  out.summary = summary;
  write_text(options, "summary.txt", out.summary);
  return out;
}

}  // namespace psc
