#pragma once

// Minimal CSV interchange: header row, comma separation, no quoting. Holds
// the matrix format (first column row_id, remaining columns indicators) and
// the (ts, score) series format.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfsense/evaluate.hpp"
#include "perfsense/smooth.hpp"

namespace perfsense {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    std::string piece = line.substr(pos, comma == std::string::npos
                                             ? std::string::npos
                                             : comma - pos);
    out.emplace_back(cfg::trim(piece));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline double parse_cell(const std::string& cell, size_t line_no) {
  try {
    size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv line " + std::to_string(line_no) +
                             ": not a number: '" + cell + "'");
  }
}

}  // namespace detail

/// Reads a decision matrix. With a schema, columns are reordered to the
/// schema's declaration order; every schema indicator must be present and no
/// extra columns are allowed.
inline DecisionMatrix read_matrix_csv(std::istream& in,
                                      const FeatureSchema* schema = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv input");
  auto header = detail::split_csv_line(line);
  if (header.size() < 2)
    throw std::runtime_error("matrix csv needs a row_id column plus data columns");

  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<size_t> order(names.size());
  for (size_t j = 0; j < names.size(); ++j) order[j] = j;

  DecisionMatrix m;
  if (schema) {
    if (names.size() != schema->size())
      throw std::runtime_error("csv columns do not match schema indicator count");
    for (size_t j = 0; j < names.size(); ++j) {
      int idx = schema->index_of(names[j]);
      if (idx < 0)
        throw std::runtime_error("csv column '" + names[j] +
                                 "' not declared in schema");
      order[static_cast<size_t>(idx)] = j;
    }
    for (const auto& ind : schema->indicators()) m.columns.push_back(ind.name);
  } else {
    m.columns = names;
  }

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (cfg::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " cells, got " + std::to_string(cells.size()));
    m.row_ids.push_back(cells[0]);
    for (size_t j = 0; j < names.size(); ++j)
      m.cells.push_back(detail::parse_cell(cells[1 + order[j]], line_no));
  }
  if (m.rows() == 0) throw std::runtime_error("matrix csv has no data rows");
  return m;
}

inline DecisionMatrix load_matrix_csv(const std::filesystem::path& path,
                                      const FeatureSchema* schema = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_matrix_csv(in, schema);
}

inline void write_matrix_csv(std::ostream& out, const DecisionMatrix& m) {
  out << "row_id";
  for (const auto& c : m.columns) out << ',' << c;
  out << '\n';
  for (size_t i = 0; i < m.rows(); ++i) {
    out << m.row_ids[i];
    for (size_t j = 0; j < m.cols(); ++j) out << ',' << format_number(m.at(i, j));
    out << '\n';
  }
}

/// Reads a (ts, score) series. Header must name the two columns ts,score.
inline ScoreSeries read_series_csv(std::istream& in, bool enforce_range = true) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv input");
  auto header = detail::split_csv_line(line);
  if (header.size() != 2 || header[0] != "ts" || header[1] != "score")
    throw std::runtime_error("series csv must start with header 'ts,score'");

  ScoreSeries s;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (cfg::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 2)
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": expected 2 cells");
    ScorePoint p;
    p.ts_ms = static_cast<std::int64_t>(detail::parse_cell(cells[0], line_no));
    p.score = detail::parse_cell(cells[1], line_no);
    if (!s.points.empty() && p.ts_ms <= s.points.back().ts_ms)
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": timestamps must be strictly ascending");
    if (enforce_range && !(p.score >= 0.0 && p.score <= 100.0))
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": score outside [0,100]");
    s.points.push_back(p);
  }
  if (s.points.empty()) throw std::runtime_error("series csv has no data rows");
  return s;
}

inline ScoreSeries load_series_csv(const std::filesystem::path& path,
                                   bool enforce_range = true) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_series_csv(in, enforce_range);
}

inline void write_series_csv(std::ostream& out, const ScoreSeries& s) {
  out << "ts,score\n";
  for (const auto& p : s.points)
    out << p.ts_ms << ',' << format_number(p.score) << '\n';
}

}  // namespace perfsense
