#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include "tqff/error.hpp"

namespace tqff {

/// Writes to a sibling temporary file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void add_row(std::vector<std::string> row);
  std::size_t column_index(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
  /// Header line, optional leading comment line, then rows.
  std::string render(const std::string& comment = {}) const;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  bool scatter = false;
  std::vector<Series> series;
};

std::string render_svg(const PlotSpec& plot);

/// gnuplot data file: one indexed block per series (`plot f index i`).
std::string render_plot_data(const PlotSpec& plot);

/// One series per distinct value of group_col (or a single series when empty);
/// rows failing the filter are skipped.
PlotSpec plot_from_table(const CsvTable& table, const std::string& x_col, const std::string& y_col,
                         const std::string& group_col = {},
                         const std::function<bool(const std::vector<std::string>&)>& filter = {});

struct ReportBundle {
  std::map<std::string, CsvTable> tables;  // name -> table, written as <name>.csv
  std::map<std::string, std::string> figures;  // name -> SVG text, written as <name>.svg
  std::map<std::string, std::string> plot_data;  // name -> gnuplot blocks, written as <name>.dat
  std::string config_json;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::string experiment;
  bool failed = false;
  std::string failure;
  std::optional<ErrorCode> failure_code;

  std::string seed_list() const;
  std::string manifest_json() const;
};

/// Writes every table (with its config-hash line), figure and manifest.json into dir.
void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Worker count: TQFF_THREADS when set and positive, else hardware concurrency (at least 1).
int thread_limit();

/// Runs body(i) for i in [0, n) on up to thread_limit() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tqff
