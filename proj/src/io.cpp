#include "psc/io.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "psc/errors.hpp"

namespace psc {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kDatasetMagic = "psc-dataset";
constexpr std::string_view kReportFormat = "psc-report v1";

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Lines without the trailing newline; a final empty line is dropped.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

long long parse_int(std::string_view text, const char* what) {
  text = trim(text);
  long long value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(std::string("invalid integer for ") + what + ": '" +
                     std::string(text) + "'");
  }
  return value;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ParseError("matrix must be a nonempty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j.at(i);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError("matrix rows differ in length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(c).get<double>();
  }
  return m;
}

WarningKind warning_kind_from(const std::string& s) {
  if (s == "removal") return WarningKind::kRemoval;
  if (s == "large_removal") return WarningKind::kLargeRemoval;
  if (s == "pca_tie") return WarningKind::kPcaTie;
  if (s == "gd_budget") return WarningKind::kGdBudget;
  throw ParseError("unknown warning kind '" + s + "'");
}

GdStatus gd_status_from(const std::string& s) {
  for (GdStatus st : {GdStatus::kGradientTolerance, GdStatus::kStepTolerance,
                      GdStatus::kIterationBudget}) {
    if (s == to_string(st)) return st;
  }
  throw ParseError("unknown gradient ascent status '" + s + "'");
}

PcaVariant pca_variant_from(const std::string& s) {
  if (s == to_string(PcaVariant::kEig)) return PcaVariant::kEig;
  if (s == to_string(PcaVariant::kConcatSvd)) return PcaVariant::kConcatSvd;
  throw ParseError("unknown PCA variant '" + s + "'");
}

}  // namespace

const char* to_string(WarningKind kind) {
  switch (kind) {
    case WarningKind::kRemoval:
      return "removal";
    case WarningKind::kLargeRemoval:
      return "large_removal";
    case WarningKind::kPcaTie:
      return "pca_tie";
    case WarningKind::kGdBudget:
      return "gd_budget";
  }
  return "unknown";
}

const char* to_string(PcaVariant variant) {
  return variant == PcaVariant::kEig ? "eig" : "concat_svd";
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                       std::chars_format::general, 17);
  if (ec != std::errc()) throw InvalidArgument("cannot format value");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() ||
      !std::isfinite(value)) {
    throw ParseError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw Error("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " +
                ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

std::string serialize_dataset(const FrameDataset& data) {
  const Eigen::Index n = data.ambient_dim();
  const Eigen::Index k = data.frame_size();
  const bool labelled = data.labels().has_value();
  std::string out = "# psc-dataset v1 N=" + std::to_string(n) +
                    " k=" + std::to_string(k) +
                    " count=" + std::to_string(data.size());
  if (labelled) out += " labels=1";
  out += '\n';
  for (std::size_t p = 0; p < data.size(); ++p) {
    const Matrix& y = data[p].matrix();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        if (i > 0 || j > 0) out += ',';
        out += format_double(y(i, j));
      }
    }
    if (labelled) out += ',' + std::to_string((*data.labels())[p]);
    out += '\n';
  }
  return out;
}

FrameDataset parse_dataset(std::string_view text, bool renormalize) {
  const std::vector<std::string_view> lines = lines_of(text);
  if (lines.empty()) throw ParseError("dataset file is empty");

  std::vector<std::string_view> tokens;
  for (std::string_view t : split(trim(lines[0]), ' ')) {
    if (!t.empty()) tokens.push_back(t);
  }
  if (tokens.size() < 3 || tokens[0] != "#" || tokens[1] != kDatasetMagic ||
      tokens[2] != "v1") {
    throw ParseError("missing '# psc-dataset v1' header");
  }
  long long n = -1;
  long long k = -1;
  long long count = -1;
  bool labelled = false;
  for (std::size_t t = 3; t < tokens.size(); ++t) {
    const std::size_t eq = tokens[t].find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("malformed header field '" + std::string(tokens[t]) + "'");
    }
    const std::string_view key = tokens[t].substr(0, eq);
    const std::string_view value = tokens[t].substr(eq + 1);
    if (key == "N") {
      n = parse_int(value, "N");
    } else if (key == "k") {
      k = parse_int(value, "k");
    } else if (key == "count") {
      count = parse_int(value, "count");
    } else if (key == "labels") {
      labelled = parse_int(value, "labels") != 0;
    } else {
      throw ParseError("unknown header field '" + std::string(key) + "'");
    }
  }
  if (n < 1 || k < 1 || k > n || count < 0) {
    throw ParseError("header needs N >= k >= 1 and count >= 0");
  }
  if (static_cast<long long>(lines.size()) - 1 != count) {
    throw ParseError("header announces " + std::to_string(count) +
                     " rows but the file has " +
                     std::to_string(lines.size() - 1));
  }

  FrameDataset data(n, k);
  std::vector<int> labels;
  const std::size_t width = static_cast<std::size_t>(n * k) + (labelled ? 1 : 0);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string_view> fields = split(trim(lines[r]), ',');
    if (fields.size() != width) {
      throw ParseError("row " + std::to_string(r) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(width));
    }
    Matrix y(n, k);
    for (long long i = 0; i < n; ++i) {
      for (long long j = 0; j < k; ++j) {
        y(i, j) = parse_double(fields[i * k + j]);
      }
    }
    try {
      data.add(renormalize ? StiefelPoint::renormalize(y) : StiefelPoint(y));
    } catch (const Error& e) {
      throw ParseError("row " + std::to_string(r) + ": " + e.what());
    }
    if (labelled) labels.push_back(static_cast<int>(parse_int(fields.back(), "label")));
  }
  if (labelled) data.set_labels(std::move(labels));
  return data;
}

void write_dataset(const std::filesystem::path& path, const FrameDataset& data) {
  write_file_atomic(path, serialize_dataset(data));
}

FrameDataset read_dataset(const std::filesystem::path& path, bool renormalize) {
  FrameDataset data = parse_dataset(read_file(path), renormalize);
  data.set_source(path.string());
  return data;
}

// ---------------------------------------------------------------------------

std::string serialize_table(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const std::vector<double>& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw ShapeMismatch("table row width differs from the header");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

Table parse_table(std::string_view text) {
  const std::vector<std::string_view> lines = lines_of(text);
  if (lines.empty()) throw ParseError("table is empty");
  Table table;
  for (std::string_view c : split(trim(lines[0]), ',')) {
    table.columns.emplace_back(trim(c));
  }
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string_view> fields = split(trim(lines[r]), ',');
    if (fields.size() != table.columns.size()) {
      throw ParseError("table row " + std::to_string(r) + " has the wrong width");
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::string_view f : fields) row.push_back(parse_double(f));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_table(const std::filesystem::path& path, const Table& table) {
  write_file_atomic(path, serialize_table(table));
}

Table read_table(const std::filesystem::path& path) {
  return parse_table(read_file(path));
}

Table column_table(const std::string& name, const std::vector<double>& values) {
  Table t{{name}, {}};
  t.rows.reserve(values.size());
  for (double v : values) t.rows.push_back({v});
  return t;
}

std::vector<double> first_column(const Table& table) {
  if (table.columns.empty()) throw ParseError("table has no columns");
  std::vector<double> out;
  out.reserve(table.rows.size());
  for (const std::vector<double>& row : table.rows) out.push_back(row.front());
  return out;
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::vector<int> labels;
  for (double v : first_column(read_table(path))) {
    if (v != std::floor(v) || std::abs(v) > 2147483647.0) {
      throw ParseError("labels must be integers");
    }
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

// ---------------------------------------------------------------------------

ReportRecord make_record(const FitReport& report) {
  ReportRecord r;
  r.ambient_dim = report.ambient_dim;
  r.frame_size = report.frame_size;
  r.target_dim = report.target_dim;
  r.input_count = report.input_count;
  r.seed = report.options.seed;
  r.gd = report.options.gd;
  r.ransac = report.options.ransac;
  r.pca_variant = report.options.pca_variant;
  r.rank_tol = report.options.rank_tol;
  r.alpha_pca = report.alpha_pca.matrix();
  r.alpha_gd = report.alpha_gd.matrix();
  r.cost_pca = report.cost_pca;
  r.cost_gd = report.cost_gd;
  r.gd_status = report.gd_status;
  r.cost_trace = report.cost_trace;
  r.removed_ransac = report.removed_ransac;
  r.removed_pca = report.removed_pca;
  r.removed_gd = report.removed_gd;
  r.survivors = report.survivors;
  for (const ProjectionOutcome& o : report.outcomes) {
    r.residuals.push_back(o.residual);
  }
  r.mse = report.mse;
  r.warnings = report.warnings;
  return r;
}

std::string serialize_report(const ReportRecord& r) {
  Json j;
  j["format"] = kReportFormat;
  j["dimensions"] = {{"N", r.ambient_dim},
                     {"k", r.frame_size},
                     {"n", r.target_dim},
                     {"count", r.input_count}};
  j["seed"] = r.seed;

  Json config;
  config["gd"] = {{"max_iters", r.gd.max_iters},
                  {"grad_tol", r.gd.grad_tol},
                  {"initial_step", r.gd.initial_step},
                  {"armijo_shrink", r.gd.armijo_shrink},
                  {"armijo_slope", r.gd.armijo_slope},
                  {"min_step", r.gd.min_step}};
  if (r.ransac) {
    config["ransac"] = {{"keep_fraction", r.ransac->keep_fraction},
                        {"outlier_threshold", r.ransac->outlier_threshold},
                        {"residual_floor", r.ransac->residual_floor},
                        {"max_rounds", r.ransac->max_rounds},
                        {"seed", r.ransac->seed}};
  } else {
    config["ransac"] = nullptr;
  }
  config["pca_variant"] = to_string(r.pca_variant);
  config["rank_tol"] = r.rank_tol;
  j["config"] = std::move(config);

  j["cost_pca"] = r.cost_pca;
  j["cost_gd"] = r.cost_gd;
  j["gd_status"] = to_string(r.gd_status);
  Json trace = Json::array();
  for (const CostTraceEntry& e : r.cost_trace) {
    trace.push_back({e.iteration, e.cost, e.grad_norm, e.step});
  }
  j["cost_trace"] = std::move(trace);

  j["removed"] = {{"ransac", r.removed_ransac},
                  {"pca", r.removed_pca},
                  {"gd", r.removed_gd}};
  j["survivors"] = r.survivors;
  j["residuals"] = r.residuals;
  j["mse"] = r.mse;
  Json warnings = Json::array();
  for (const FitWarning& w : r.warnings) {
    warnings.push_back({{"kind", to_string(w.kind)}, {"message", w.message}});
  }
  j["warnings"] = std::move(warnings);
  j["alpha_pca"] = matrix_to_json(r.alpha_pca);
  j["alpha_gd"] = matrix_to_json(r.alpha_gd);
  return j.dump(1) + "\n";
}

ReportRecord parse_report(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kReportFormat) {
      throw ParseError("unsupported report format");
    }
    ReportRecord r;
    const Json& dims = j.at("dimensions");
    r.ambient_dim = dims.at("N").get<Eigen::Index>();
    r.frame_size = dims.at("k").get<Eigen::Index>();
    r.target_dim = dims.at("n").get<Eigen::Index>();
    r.input_count = dims.at("count").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();

    const Json& config = j.at("config");
    const Json& gd = config.at("gd");
    r.gd.max_iters = gd.at("max_iters").get<int>();
    r.gd.grad_tol = gd.at("grad_tol").get<double>();
    r.gd.initial_step = gd.at("initial_step").get<double>();
    r.gd.armijo_shrink = gd.at("armijo_shrink").get<double>();
    r.gd.armijo_slope = gd.at("armijo_slope").get<double>();
    r.gd.min_step = gd.at("min_step").get<double>();
    if (!config.at("ransac").is_null()) {
      const Json& rs = config.at("ransac");
      RansacConfig rc;
      rc.keep_fraction = rs.at("keep_fraction").get<double>();
      rc.outlier_threshold = rs.at("outlier_threshold").get<double>();
      rc.residual_floor = rs.at("residual_floor").get<double>();
      rc.max_rounds = rs.at("max_rounds").get<int>();
      rc.seed = rs.at("seed").get<std::uint64_t>();
      r.ransac = rc;
    }
    r.pca_variant = pca_variant_from(config.at("pca_variant").get<std::string>());
    r.rank_tol = config.at("rank_tol").get<double>();

    r.cost_pca = j.at("cost_pca").get<double>();
    r.cost_gd = j.at("cost_gd").get<double>();
    r.gd_status = gd_status_from(j.at("gd_status").get<std::string>());
    for (const Json& e : j.at("cost_trace")) {
      r.cost_trace.push_back({e.at(0).get<int>(), e.at(1).get<double>(),
                              e.at(2).get<double>(), e.at(3).get<double>()});
    }
    const Json& removed = j.at("removed");
    r.removed_ransac = removed.at("ransac").get<std::vector<std::size_t>>();
    r.removed_pca = removed.at("pca").get<std::vector<std::size_t>>();
    r.removed_gd = removed.at("gd").get<std::vector<std::size_t>>();
    r.survivors = j.at("survivors").get<std::vector<std::size_t>>();
    r.residuals = j.at("residuals").get<std::vector<double>>();
    r.mse = j.at("mse").get<double>();
    for (const Json& w : j.at("warnings")) {
      r.warnings.push_back({warning_kind_from(w.at("kind").get<std::string>()),
                            w.at("message").get<std::string>()});
    }
    r.alpha_pca = matrix_from_json(j.at("alpha_pca"));
    r.alpha_gd = matrix_from_json(j.at("alpha_gd"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

void write_report(const std::filesystem::path& path, const FitReport& report) {
  write_file_atomic(path, serialize_report(make_record(report)));
}

ReportRecord read_report(const std::filesystem::path& path) {
  return parse_report(read_file(path));
}

FitReport rebuild_report(const ReportRecord& r, const FrameDataset& data) {
  if (data.ambient_dim() != r.ambient_dim || data.frame_size() != r.frame_size ||
      data.size() != r.input_count) {
    throw ShapeMismatch("dataset does not match the report dimensions");
  }
  for (std::size_t i : r.survivors) {
    if (i >= data.size()) throw ParseError("survivor index out of range");
  }
  FitOptions options;
  options.gd = r.gd;
  options.ransac = r.ransac;
  options.pca_variant = r.pca_variant;
  options.rank_tol = r.rank_tol;
  options.seed = r.seed;
  FitReport report{
      .ambient_dim = r.ambient_dim,
      .frame_size = r.frame_size,
      .target_dim = r.target_dim,
      .input_count = r.input_count,
      .alpha_pca = StiefelPoint(r.alpha_pca),
      .alpha_gd = StiefelPoint(r.alpha_gd),
      .cost_pca = r.cost_pca,
      .cost_gd = r.cost_gd,
      .cost_trace = r.cost_trace,
      .gd_status = r.gd_status,
      .removed_ransac = r.removed_ransac,
      .removed_pca = r.removed_pca,
      .removed_gd = r.removed_gd,
      .survivors = r.survivors,
      .outcomes = {},
      .mse = r.mse,
      .options = options,
      .warnings = r.warnings,
      .elapsed_seconds = 0.0,
  };
  report.outcomes =
      project_batch(report.alpha_gd, data.subset(r.survivors), r.rank_tol);
  return report;
}

}  // namespace psc
