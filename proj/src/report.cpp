#include "densnet/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "densnet/error.hpp"
#include "densnet/text_io.hpp"

namespace densnet::exp {

Cell::Cell(double v) : text(format_double(v)) {}

void Table::add_row(const std::vector<Cell>& cells) {
  if (cells.size() != columns.size())
    throw Error("table: row has " + std::to_string(cells.size()) + " cells, header has " +
                std::to_string(columns.size()));
  std::vector<std::string> row;
  row.reserve(cells.size());
  for (const auto& c : cells) row.push_back(c.text);
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("table: no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double Table::number(std::size_t row, const std::string& name) const {
  if (row >= rows.size()) throw Error("table: row out of range");
  return parse_double(rows[row][column(name)]);
}

namespace {

void check_cell(const std::string& s) {
  if (s.find_first_of(",\"\n\r") != std::string::npos) throw Error("csv: cell needs quoting: '" + s + "'");
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    check_cell(cells[i]);
    line += (i ? "," : "") + cells[i];
  }
  return line + "\n";
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Colorblind-safe cycle.
constexpr const char* kColors[] = {"#0072b2", "#d55e00", "#009e73", "#cc79a7", "#e69f00",
                                   "#56b4e9", "#f0e442", "#000000"};

}  // namespace

std::string format_csv(const Table& table) {
  if (table.columns.empty()) throw Error("csv: no columns");
  std::string out = join_row(table.columns);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw Error("csv: ragged row");
    out += join_row(row);
  }
  return out;
}

Table parse_csv(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    auto line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw Error("csv: empty input");
  Table t(split_row(lines[0]));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto row = split_row(lines[i]);
    if (row.size() != t.columns.size()) throw Error("csv line " + std::to_string(i + 1) + ": wrong cell count");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void emit_csv(const Table& table, const std::string& path) { write_text_file(path, format_csv(table)); }

std::string format_svg_plot(const std::vector<Series>& series, const PlotOptions& o) {
  if (series.empty()) throw Error("plot: no series");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  const auto ty = [&](double y) { return o.log_y ? std::log10(y) : y; };
  for (const auto& s : series) {
    if (s.x.empty()) throw Error("plot: series '" + s.label + "' is empty");
    if (s.x.size() != s.y.size()) throw Error("plot: series '" + s.label + "' has mismatched x/y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) throw Error("plot: non-finite value in '" + s.label + "'");
      if (o.log_y && s.y[i] <= 0.0) throw Error("plot: non-positive value on log axis in '" + s.label + "'");
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double left = 70, right = 170, top = 40, bottom = 50;
  const double pw = o.width - left - right, ph = o.height - top - bottom;
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return top + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(o.width) + "\" height=\"" +
       std::to_string(o.height) + "\" viewBox=\"0 0 " + std::to_string(o.width) + " " + std::to_string(o.height) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       escape_xml(o.title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const double yl = o.log_y ? std::pow(10.0, yv) : yv;
    s += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">" +
         tick_label(xv) + "</text>\n";
    s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + ph - (yv - y0) / (y1 - y0) * ph + 4) +
         "\" text-anchor=\"end\">" + tick_label(yl) + "</text>\n";
  }
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(o.height - 10.0) + "\" text-anchor=\"middle\">" +
       escape_xml(o.x_label) + "</text>\n";
  s += "<text transform=\"translate(16," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape_xml(o.y_label) + (o.log_y ? " (log)" : "") + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    std::string pts;
    for (std::size_t k = 0; k < series[i].x.size(); ++k)
      pts += (k ? " " : "") + num(px(series[i].x[k])) + "," + num(py(series[i].y[k]));
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"" +
         (series[i].dashed ? " stroke-dasharray=\"5,3\"" : "") + " points=\"" + pts + "\"/>\n";
  }
  s += "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = top + 10 + 18.0 * static_cast<double>(i);
    const char* color = kColors[i % std::size(kColors)];
    s += "<line x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left + pw + 32) + "\" y2=\"" +
         num(y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
         (series[i].dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>\n";
    s += "<text x=\"" + num(left + pw + 38) + "\" y=\"" + num(y + 4) + "\">" + escape_xml(series[i].label) +
         "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

void emit_svg_plot(const std::vector<Series>& series, const PlotOptions& options, const std::string& path) {
  write_text_file(path, format_svg_plot(series, options));
}

}  // namespace densnet::exp
