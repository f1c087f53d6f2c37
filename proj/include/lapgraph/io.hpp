#pragma once

// Plain CSV ingestion and emission: dated panels, dense matrices and
// indicator tables. Numbers are written with 17 significant digits so that a
// write/read round trip is exact.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lapgraph/analytics.hpp"
#include "lapgraph/dates.hpp"
#include "lapgraph/errors.hpp"
#include "lapgraph/graphcore.hpp"
#include "lapgraph/preprocess.hpp"

namespace lapgraph {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace detail

struct DatedPanel {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Matrix values;
  Index dropped_rows = 0;  // rows with a missing value that were removed
  Index filled_cells = 0;  // cells forward-filled
};

/// Reads `date,<ticker>,...` with ISO dates in strictly increasing order.
/// Rows with a missing cell are dropped, or forward-filled from the previous
/// row when `ffill` is set (a gap in the first data row still drops it).
inline DatedPanel read_dated_csv(const std::filesystem::path& path, bool ffill = false) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header.front() != "date")
    throw ValidationError(path.string() + ": header must be date,<ticker1>,<ticker2>,...");
  DatedPanel panel;
  panel.tickers.assign(header.begin() + 1, header.end());
  for (std::size_t i = 0; i < panel.tickers.size(); ++i) {
    if (panel.tickers[i].empty()) throw ValidationError(path.string() + ": empty ticker name in header");
    for (std::size_t j = 0; j < i; ++j)
      if (panel.tickers[i] == panel.tickers[j])
        throw ValidationError(path.string() + ": duplicate ticker " + panel.tickers[i]);
  }
  const std::size_t p = panel.tickers.size();

  std::vector<std::vector<double>> rows;
  std::vector<double> previous;
  std::string last_date;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = path.string() + " row " + std::to_string(row_no);
    if (cells.size() != p + 1)
      throw ValidationError(where + ": expected " + std::to_string(p + 1) + " fields, found " +
                            std::to_string(cells.size()));
    const std::string& date = cells.front();
    if (!is_iso_date(date)) throw ValidationError(where + ": invalid date '" + date + "'");
    if (!last_date.empty()) {
      if (date == last_date) throw ValidationError(where + ": duplicate date " + date);
      if (date < last_date)
        throw ValidationError(where + ": date " + date + " is not after " + last_date);
    }
    last_date = date;

    std::vector<double> values(p);
    bool missing = false;
    Index filled = 0;
    for (std::size_t i = 0; i < p; ++i) {
      const std::string& cell = cells[i + 1];
      if (detail::is_missing(cell)) {
        if (ffill && !previous.empty()) {
          values[i] = previous[i];
          ++filled;
        } else {
          missing = true;
        }
        continue;
      }
      const auto v = detail::parse_number(cell);
      if (!v || !std::isfinite(*v))
        throw ValidationError(where + ": non-numeric value '" + cell + "' for " + panel.tickers[i]);
      values[i] = *v;
    }
    if (missing) {
      ++panel.dropped_rows;
      continue;
    }
    panel.filled_cells += filled;
    panel.dates.push_back(date);
    previous = values;
    rows.push_back(std::move(values));
  }
  panel.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(p));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < p; ++i) panel.values(static_cast<Index>(t), static_cast<Index>(i)) = rows[t][i];
  return panel;
}

inline PricePanel ingest_prices(const std::filesystem::path& path, bool ffill = false) {
  DatedPanel d = read_dated_csv(path, ffill);
  for (Index t = 0; t < d.values.rows(); ++t)
    for (Index i = 0; i < d.values.cols(); ++i)
      if (!(d.values(t, i) > 0.0))
        throw ValidationError(path.string() + ": non-positive price for " + d.tickers[i] + " on " + d.dates[t]);
  return {std::move(d.dates), std::move(d.tickers), std::move(d.values)};
}

inline ReturnsPanel ingest_returns(const std::filesystem::path& path, bool ffill = false) {
  DatedPanel d = read_dated_csv(path, ffill);
  return {std::move(d.dates), std::move(d.tickers), std::move(d.values)};
}

inline void write_dated_csv(const std::filesystem::path& path, const std::vector<std::string>& dates,
                            const std::vector<std::string>& columns, const Matrix& values) {
  validate_panel_shape(dates, columns, values, "write_dated_csv");
  std::ofstream out = detail::open_output(path);
  out << "date";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (Index t = 0; t < values.rows(); ++t) {
    out << dates[t];
    for (Index i = 0; i < values.cols(); ++i) out << ',' << format_number(values(t, i));
    out << '\n';
  }
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& M) {
  std::ofstream out = detail::open_output(path);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_number(M(i, j));
    }
    out << '\n';
  }
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    std::vector<double> r;
    r.reserve(cells.size());
    for (const auto& c : cells) {
      const auto v = detail::parse_number(c);
      if (!v)
        throw ValidationError(path.string() + " row " + std::to_string(row_no) + ": non-numeric value '" + c + "'");
      r.push_back(*v);
    }
    if (!rows.empty() && r.size() != rows.front().size())
      throw ValidationError(path.string() + " row " + std::to_string(row_no) + ": ragged row");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": empty matrix file");
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return M;
}

/// date,lambda2,lambda_max,consistency; consistency is blank on the first row
/// and holds ||L_t - L_{t-1}||_F^2 afterwards.
inline void write_indicators_csv(const std::filesystem::path& path, const IndicatorSeries& s) {
  std::ofstream out = detail::open_output(path);
  out << "date,lambda2,lambda_max,consistency\n";
  for (Index t = 0; t < s.size(); ++t) {
    out << s.dates[t] << ',' << format_number(s.algebraic_connectivity[t]) << ','
        << format_number(s.spectral_radius[t]) << ',';
    if (t > 0) out << format_number(s.time_consistency[t - 1]);
    out << '\n';
  }
}

inline IndicatorSeries read_indicators_csv(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line).front() != "date")
    throw ValidationError(path.string() + ": expected header date,lambda2,lambda_max,consistency");
  std::vector<double> l2, lmax, tc;
  IndicatorSeries s;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = path.string() + " row " + std::to_string(row_no);
    if (cells.size() < 3) throw ValidationError(where + ": expected at least 3 fields");
    if (!is_iso_date(cells[0])) throw ValidationError(where + ": invalid date '" + cells[0] + "'");
    const auto a = detail::parse_number(cells[1]);
    const auto b = detail::parse_number(cells[2]);
    if (!a || !b) throw ValidationError(where + ": non-numeric indicator");
    s.dates.push_back(cells[0]);
    l2.push_back(*a);
    lmax.push_back(*b);
    if (l2.size() > 1) {
      const auto c = cells.size() > 3 ? detail::parse_number(cells[3]) : std::nullopt;
      tc.push_back(c ? *c : std::nan(""));
    }
  }
  if (s.dates.empty()) throw ValidationError(path.string() + ": no indicator rows");
  s.algebraic_connectivity = Eigen::Map<Vector>(l2.data(), static_cast<Index>(l2.size()));
  s.spectral_radius = Eigen::Map<Vector>(lmax.data(), static_cast<Index>(lmax.size()));
  s.time_consistency = Eigen::Map<Vector>(tc.data(), static_cast<Index>(tc.size()));
  return s;
}

}  // namespace lapgraph
