#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace densnet::exp {

/// One CSV cell. Numbers are rendered with %.17g so a parse gives the
/// identical double back.
struct Cell {
  std::string text;
  Cell(const char* s) : text(s) {}
  Cell(std::string s) : text(std::move(s)) {}
  Cell(double v);
  Cell(int v) : text(std::to_string(v)) {}
  Cell(long v) : text(std::to_string(v)) {}
  Cell(std::size_t v) : text(std::to_string(v)) {}
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  explicit Table(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}
  /// Throws if the row width differs from the header.
  void add_row(const std::vector<Cell>& cells);
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  friend bool operator==(const Table&, const Table&) = default;
};

/// Comma separated, header line first, '\n' line ends. Cells containing
/// commas or quotes are rejected rather than quoted.
std::string format_csv(const Table& table);
Table parse_csv(const std::string& text);
void emit_csv(const Table& table, const std::string& path);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// Standalone SVG line chart: axes, one polyline per series and a legend.
/// Throws on an empty series list, an empty or ragged series, or
/// non-positive values on a log axis.
std::string format_svg_plot(const std::vector<Series>& series, const PlotOptions& options);
void emit_svg_plot(const std::vector<Series>& series, const PlotOptions& options, const std::string& path);

}  // namespace densnet::exp
