#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psc/pipeline.hpp"

namespace psc {

/// 17 significant digits, shortest of fixed or scientific notation.
std::string format_double(double value);
/// Strict: the whole field must be consumed. Throws ParseError.
double parse_double(std::string_view text);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);
std::string read_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset files:
//
//   # psc-dataset v1 N=<int> k=<int> count=<int> [labels=1]
//   y(0,0),y(0,1),...,y(N-1,k-1)[,label]
//
// One row per point; entry (i, j) sits in column i * k + j.

std::string serialize_dataset(const FrameDataset& data);
/// With `renormalize`, rows are polar-projected before admission, so slightly
/// non-orthonormal input is accepted.
FrameDataset parse_dataset(std::string_view text, bool renormalize = false);
void write_dataset(const std::filesystem::path& path, const FrameDataset& data);
FrameDataset read_dataset(const std::filesystem::path& path,
                          bool renormalize = false);

// ---------------------------------------------------------------------------
// Plain numeric CSV with a header line.

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string serialize_table(const Table& table);
Table parse_table(std::string_view text);
void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

/// One-column table of the given name.
Table column_table(const std::string& name, const std::vector<double>& values);
/// The first column of a table. Throws ParseError when the table is empty.
std::vector<double> first_column(const Table& table);
/// Integer labels from the first column; non-integral values are rejected.
std::vector<int> read_labels(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Fit reports as JSON.

struct ReportRecord {
  Eigen::Index ambient_dim = 0;
  Eigen::Index frame_size = 0;
  Eigen::Index target_dim = 0;
  std::size_t input_count = 0;
  std::uint64_t seed = 0;

  GdConfig gd;
  std::optional<RansacConfig> ransac;
  PcaVariant pca_variant = PcaVariant::kEig;
  double rank_tol = kRankTolerance;

  Matrix alpha_pca;
  Matrix alpha_gd;
  double cost_pca = 0.0;
  double cost_gd = 0.0;
  GdStatus gd_status = GdStatus::kGradientTolerance;
  CostTrace cost_trace;

  std::vector<std::size_t> removed_ransac;
  std::vector<std::size_t> removed_pca;
  std::vector<std::size_t> removed_gd;
  std::vector<std::size_t> survivors;
  std::vector<double> residuals;
  double mse = 0.0;

  std::vector<FitWarning> warnings;
};

ReportRecord make_record(const FitReport& report);
std::string serialize_report(const ReportRecord& record);
ReportRecord parse_report(std::string_view text);
void write_report(const std::filesystem::path& path, const FitReport& report);
ReportRecord read_report(const std::filesystem::path& path);

/// Reconstructs a FitReport from a record and the dataset it was fitted on,
/// recomputing the per-point projections under alpha_gd.
FitReport rebuild_report(const ReportRecord& record, const FrameDataset& data);

const char* to_string(WarningKind kind);
const char* to_string(PcaVariant variant);

}  // namespace psc
