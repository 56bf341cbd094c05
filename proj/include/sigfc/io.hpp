#pragma once

// CSV panel ingestion and locale-independent number formatting.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sigfc/dates.hpp"
#include "sigfc/error.hpp"
#include "sigfc/pipeline.hpp"

namespace sigfc::io {

struct IngestOptions {
  std::string date_column = "date";
  std::string target_column = "y";
  std::vector<std::string> allow;  // when non-empty, only these factor columns
  std::vector<std::string> deny;
  dates::Frequency frequency = dates::Frequency::none;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Parse a panel: optional '#' comment lines, header row, one ISO date column, one target column, and
/// every other column (subject to allow/deny) as a factor. Rows are sorted by
/// date; duplicate dates, gaps at the declared frequency, empty cells and
/// malformed numbers are DataErrors that name the offending rows.
inline FactorPanel read_panel(std::istream& in, const IngestOptions& opt, const std::string& source = "<input>") {
  std::string line;
  std::size_t lineno = 0;
  // Leading '#' lines are comments (the CLI writes its effective config there).
  do {
    if (!std::getline(in, line)) throw DataError(source + ": empty file (no header row)");
    ++lineno;
  } while (!line.empty() && line.front() == '#');
  const auto header = split_csv_line(line);
  std::size_t date_col = header.size();
  std::size_t target_col = header.size();
  std::vector<std::size_t> factor_cols;
  {
    std::set<std::string> seen;
    for (const auto& h : header)
      if (!seen.insert(h).second) throw DataError(source + ": duplicate column '" + h + "'");
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == opt.date_column)
      date_col = c;
    else if (header[c] == opt.target_column)
      target_col = c;
  }
  if (date_col == header.size()) throw DataError(source + ": no date column '" + opt.date_column + "'");
  if (target_col == header.size()) throw DataError(source + ": no target column '" + opt.target_column + "'");
  for (const auto& name : opt.allow)
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw DataError(source + ": allowed factor column '" + name + "' not found");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == date_col || c == target_col) continue;
    const auto& name = header[c];
    if (!opt.allow.empty() && std::find(opt.allow.begin(), opt.allow.end(), name) == opt.allow.end()) continue;
    if (std::find(opt.deny.begin(), opt.deny.end(), name) != opt.deny.end()) continue;
    factor_cols.push_back(c);
  }

  struct Row {
    dates::Day day;
    std::string date;
    std::size_t line;
    double y;
    std::vector<double> x;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(source + ": row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()));
    Row r;
    r.line = lineno;
    r.date = cells[date_col];
    const auto day = dates::parse(r.date);
    if (!day)
      throw DataError(source + ": row " + std::to_string(lineno) + " column '" + opt.date_column +
                      "': invalid date '" + r.date + "' (expected YYYY-MM-DD)");
    r.day = *day;
    auto number = [&](std::size_t c) {
      if (cells[c].empty())
        throw DataError(source + ": row " + std::to_string(lineno) + " column '" + header[c] + "': missing value");
      double v;
      if (!parse_double(cells[c], v))
        throw DataError(source + ": row " + std::to_string(lineno) + " column '" + header[c] +
                        "': malformed number '" + cells[c] + "'");
      return v;
    };
    r.y = number(target_col);
    for (auto c : factor_cols) r.x.push_back(number(c));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError(source + ": no data rows");
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.day < b.day; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].day == rows[i - 1].day)
      throw DataError(source + ": duplicate date " + rows[i].date + " (rows " + std::to_string(rows[i - 1].line) +
                      " and " + std::to_string(rows[i].line) + ")");
    if (!dates::is_next(rows[i - 1].day, rows[i].day, opt.frequency))
      throw DataError(source + ": gap in " + dates::to_string(opt.frequency) + " series between " +
                      rows[i - 1].date + " (row " + std::to_string(rows[i - 1].line) + ") and " +
                      rows[i].date + " (row " + std::to_string(rows[i].line) + ")");
  }

  FactorPanel p;
  for (auto c : factor_cols) p.factor_names.push_back(header[c]);
  p.factors.assign(factor_cols.size(), {});
  for (const auto& r : rows) {
    p.dates.push_back(r.date);
    p.target.push_back(r.y);
    for (std::size_t j = 0; j < r.x.size(); ++j) p.factors[j].push_back(r.x[j]);
  }
  p.validate();
  return p;
}

inline FactorPanel ingest_csv(const std::string& path, const IngestOptions& opt = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_panel(in, opt, path);
}

/// Panel as CSV: date, target, then factors, with round-trip number text.
inline void write_panel(std::ostream& out, const FactorPanel& p, const std::string& date_column = "date",
                        const std::string& target_column = "y") {
  out << date_column << ',' << target_column;
  for (const auto& n : p.factor_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < p.length(); ++i) {
    out << p.dates[i] << ',' << format_double(p.target[i]);
    for (const auto& f : p.factors) out << ',' << format_double(f[i]);
    out << '\n';
  }
}

}  // namespace sigfc::io
