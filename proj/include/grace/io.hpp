#pragma once

// Numeric CSV and edge-list readers. External node ids are 1-based.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "grace/core.hpp"
#include "grace/graph.hpp"
#include "grace/inference.hpp"

namespace grace {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Parses a finite real; accepts a leading '+'.
inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

/// Reads a comma-separated numeric matrix. A first row with any
/// non-numeric, non-empty field is taken as a header and skipped. Blank
/// lines are ignored; empty fields and non-numeric entries are errors.
inline Matrix read_csv_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_commas(line);
    if (first) {
      first = false;
      bool header = false;
      for (auto f : fields) {
        double v;
        if (!detail::trim(f).empty() && !detail::parse_real(f, v)) header = true;
      }
      if (header) continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " fields, found " + std::to_string(fields.size()),
                       line_no, std::min(fields.size(), width) + 1);
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (detail::trim(fields[c]).empty()) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                             ": missing value",
                         line_no, c + 1);
      }
      if (!detail::parse_real(fields[c], row[c])) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                             ": cannot parse '" + std::string(detail::trim(fields[c])) + "' as a number",
                         line_no, c + 1);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no numeric rows", line_no, 0);
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return out;
}

inline Matrix read_csv_matrix(const std::string& path) {
  auto in = detail::open_input(path);
  return read_csv_matrix(in);
}

/// A response vector stored as one column or as one row.
inline Vector read_csv_vector(std::istream& in) {
  const Matrix m = read_csv_matrix(in);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw InvalidArgument("response file must have a single column or a single row, found " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline Vector read_csv_vector(const std::string& path) {
  auto in = detail::open_input(path);
  return read_csv_vector(in);
}

inline void write_csv_matrix(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_real(m(i, j));
    out << '\n';
  }
}

/// Edge list: a required `nodes <p>` line, then `u v [w]` per line with
/// 1-based ids and w defaulting to 1. `#` starts a comment line.
inline WeightedGraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Index nodes = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream tokens{std::string(body)};
    std::vector<std::string> t;
    for (std::string s; tokens >> s;) t.push_back(s);
    auto fail = [&](std::size_t col, const std::string& why) {
      throw ParseError("line " + std::to_string(line_no) + ", field " + std::to_string(col) + ": " + why,
                       line_no, col);
    };
    if (nodes < 0) {
      if (t.size() != 2 || t[0] != "nodes") fail(1, "expected header 'nodes <p>'");
      double v;
      if (!detail::parse_real(t[1], v) || v < 1 || v != std::floor(v)) fail(2, "node count must be a positive integer");
      nodes = static_cast<Index>(v);
      continue;
    }
    if (t.size() < 2 || t.size() > 3) fail(1, "expected 'u v [w]'");
    Index ends[2];
    for (int k = 0; k < 2; ++k) {
      double v;
      if (!detail::parse_real(t[static_cast<std::size_t>(k)], v) || v != std::floor(v)) {
        fail(static_cast<std::size_t>(k + 1), "node id must be an integer");
      }
      if (v < 1 || v > static_cast<double>(nodes)) {
        fail(static_cast<std::size_t>(k + 1), "node id out of range 1.." + std::to_string(nodes));
      }
      ends[k] = static_cast<Index>(v) - 1;
    }
    double w = 1.0;
    if (t.size() == 3 && !detail::parse_real(t[2], w)) fail(3, "cannot parse weight '" + t[2] + "'");
    edges.push_back({std::min(ends[0], ends[1]), std::max(ends[0], ends[1]), w});
  }
  if (nodes < 0) throw ParseError("missing 'nodes <p>' header", line_no, 0);
  return WeightedGraph(nodes, std::move(edges));
}

inline WeightedGraph read_edge_list(const std::string& path) {
  auto in = detail::open_input(path);
  return read_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out << "nodes " << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) out << (e.u + 1) << ' ' << (e.v + 1) << ' ' << format_real(e.w) << '\n';
}

}  // namespace grace
