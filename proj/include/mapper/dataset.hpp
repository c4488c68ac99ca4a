#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mapper/error.hpp"

namespace mapper {

enum class ColumnKind { numerical, categorical };

inline const char *to_string(ColumnKind kind) {
  return kind == ColumnKind::numerical ? "numerical" : "categorical";
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numerical;
  std::size_t index = 0; // ordinal in the input header
};

enum class Metric { euclidean };

/// Raw string table as read from CSV.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Immutable point cloud: N rows by d numerical columns (row-major), plus the
/// label values of every categorical column. Row i is the identity of a point
/// for the whole pipeline.
class PointCloud {
public:
  PointCloud(std::vector<double> values, std::size_t rows,
             std::vector<ColumnSpec> columns,
             std::vector<std::vector<std::string>> labels = {},
             Metric metric = Metric::euclidean)
      : values_(std::move(values)), rows_(rows), columns_(std::move(columns)),
        labels_(std::move(labels)), metric_(metric) {
    for (const auto &c : columns_) {
      if (c.kind == ColumnKind::numerical)
        numerical_.push_back(c.name);
      else
        categorical_.push_back(c.name);
    }
    dims_ = numerical_.size();
    if (rows_ == 0)
      throw DataError("no usable rows");
    if (dims_ == 0)
      throw DataError("no numerical columns");
    if (values_.size() != rows_ * dims_)
      throw DataError("point matrix size does not match rows x numerical columns");
    if (labels_.size() != categorical_.size())
      throw DataError("categorical label columns do not match column specs");
    for (const auto &col : labels_)
      if (col.size() != rows_)
        throw DataError("categorical column length does not match row count");
    for (double v : values_)
      if (!std::isfinite(v))
        throw DataError("non-finite numerical value");
    auto names = std::vector<std::string>{};
    for (const auto &c : columns_)
      names.push_back(c.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
      throw DataError("duplicate column name");
  }

  /// Convenience for purely numerical data with generated column names x0..x{d-1}.
  static PointCloud from_matrix(std::vector<double> values, std::size_t rows,
                                std::size_t dims) {
    std::vector<ColumnSpec> cols;
    for (std::size_t j = 0; j < dims; ++j)
      cols.push_back({"x" + std::to_string(j), ColumnKind::numerical, j});
    return PointCloud(std::move(values), rows, std::move(cols));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return dims_; }
  Metric metric() const noexcept { return metric_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dims_, dims_};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * dims_ + j]; }
  const std::vector<double> &values() const noexcept { return values_; }

  const std::vector<ColumnSpec> &columns() const noexcept { return columns_; }
  const std::vector<std::string> &numerical_names() const noexcept { return numerical_; }
  const std::vector<std::string> &categorical_names() const noexcept { return categorical_; }
  /// labels()[c][i]: value of categorical column c at row i.
  const std::vector<std::vector<std::string>> &labels() const noexcept { return labels_; }

  std::optional<std::size_t> numerical_index(std::string_view name) const {
    auto it = std::find(numerical_.begin(), numerical_.end(), name);
    if (it == numerical_.end())
      return std::nullopt;
    return static_cast<std::size_t>(it - numerical_.begin());
  }
  bool has_categorical(std::string_view name) const {
    return std::find(categorical_.begin(), categorical_.end(), name) != categorical_.end();
  }

  /// Same columns, numerical values replaced.
  PointCloud with_values(std::vector<double> values) const {
    return PointCloud(std::move(values), rows_, columns_, labels_, metric_);
  }

  /// Cloud restricted to `rows` (in the given order).
  PointCloud subset(std::span<const std::size_t> rows) const {
    std::vector<double> vals;
    vals.reserve(rows.size() * dims_);
    std::vector<std::vector<std::string>> labs(labels_.size());
    for (std::size_t r : rows) {
      if (r >= rows_)
        throw DataError("row index out of range");
      auto src = row(r);
      vals.insert(vals.end(), src.begin(), src.end());
      for (std::size_t c = 0; c < labels_.size(); ++c)
        labs[c].push_back(labels_[c][r]);
    }
    return PointCloud(std::move(vals), rows.size(), columns_, std::move(labs), metric_);
  }

  std::size_t bytes() const noexcept { return values_.size() * sizeof(double); }

private:
  std::vector<double> values_;
  std::size_t rows_;
  std::size_t dims_ = 0;
  std::vector<ColumnSpec> columns_;
  std::vector<std::string> numerical_;
  std::vector<std::string> categorical_;
  std::vector<std::vector<std::string>> labels_;
  Metric metric_;
};

struct WrangleReport {
  std::size_t input_rows = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::vector<ColumnSpec> columns;
  std::vector<std::size_t> kept_rows; // input row ordinals that survived
};

inline nlohmann::json to_json(const WrangleReport &r) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto &c : r.columns)
    cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}, {"index", c.index}});
  return {{"input_rows", r.input_rows}, {"kept", r.kept}, {"dropped", r.dropped},
          {"columns", cols}};
}

struct Wrangled {
  PointCloud cloud;
  WrangleReport report;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

} // namespace detail

/// Empty, "NA", "NaN" and "null" (any case) mark a missing value.
inline bool is_missing(std::string_view cell) {
  cell = detail::trim(cell);
  return cell.empty() || detail::iequals(cell, "na") || detail::iequals(cell, "nan") ||
         detail::iequals(cell, "null");
}

/// Strict real parse of the whole (trimmed) cell. Infinities are rejected.
inline std::optional<double> parse_real(std::string_view cell) {
  cell = detail::trim(cell);
  if (cell.empty())
    return std::nullopt;
  if (cell.front() == '+')
    cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

/// Comma-separated text, first line is the header. Quoted commas are not
/// supported.
inline Table parse_csv(std::istream &in) {
  Table t;
  std::string line;
  auto split = [](const std::string &l) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto pos = l.find(',', start);
      cells.emplace_back(detail::trim(std::string_view(l).substr(
          start, pos == std::string::npos ? std::string::npos : pos - start)));
      if (pos == std::string::npos)
        break;
      start = pos + 1;
    }
    return cells;
  };
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (!have_header) {
      if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
      if (detail::trim(line).empty())
        continue;
      t.header = split(line);
      have_header = true;
      continue;
    }
    if (detail::trim(line).empty())
      continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (!have_header)
    throw DataError("missing header line");
  return t;
}

inline Table parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_csv(in);
}

inline Table read_csv_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return parse_csv(in);
}

/// Column typing and missing-value handling. A column is numerical iff every
/// non-missing cell parses as a finite real (an all-missing column counts as
/// categorical). Rows with a missing numerical cell are dropped.
inline Wrangled wrangle(const Table &table) {
  const auto &header = table.header;
  for (const auto &r : table.rows)
    if (r.size() != header.size())
      throw DataError("row length does not match header length");

  std::vector<ColumnSpec> cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    bool any_value = false;
    bool all_numeric = true;
    for (const auto &r : table.rows) {
      if (is_missing(r[j]))
        continue;
      any_value = true;
      if (!parse_real(r[j])) {
        all_numeric = false;
        break;
      }
    }
    cols.push_back({header[j],
                    any_value && all_numeric ? ColumnKind::numerical : ColumnKind::categorical,
                    j});
  }
  {
    auto names = header;
    std::sort(names.begin(), names.end());
    if (auto it = std::adjacent_find(names.begin(), names.end()); it != names.end())
      throw DataError("duplicate column name '" + *it + "'");
  }

  WrangleReport report;
  report.input_rows = table.rows.size();
  report.columns = cols;

  std::size_t n_cat = 0;
  for (const auto &c : cols)
    n_cat += c.kind == ColumnKind::categorical;
  if (n_cat == cols.size())
    throw DataError("no numerical columns");

  std::vector<double> values;
  std::vector<std::vector<std::string>> labels(n_cat);
  std::vector<double> row_vals;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto &r = table.rows[i];
    row_vals.clear();
    bool ok = true;
    for (const auto &c : cols) {
      if (c.kind != ColumnKind::numerical)
        continue;
      auto v = parse_real(r[c.index]);
      if (!v) {
        ok = false;
        break;
      }
      row_vals.push_back(*v);
    }
    if (!ok) {
      ++report.dropped;
      continue;
    }
    values.insert(values.end(), row_vals.begin(), row_vals.end());
    std::size_t k = 0;
    for (const auto &c : cols)
      if (c.kind == ColumnKind::categorical)
        labels[k++].push_back(r[c.index]);
    report.kept_rows.push_back(i);
  }
  report.kept = report.kept_rows.size();
  if (report.kept == 0)
    throw DataError("no usable rows");
  return {PointCloud(std::move(values), report.kept, cols, std::move(labels)), report};
}

enum class Normalization { none, min_max, l2_rows };

inline const char *to_string(Normalization n) {
  switch (n) {
  case Normalization::none: return "none";
  case Normalization::min_max: return "minmax";
  case Normalization::l2_rows: return "l2";
  }
  return "none";
}

inline Normalization parse_normalization(std::string_view s) {
  if (s == "none")
    return Normalization::none;
  if (s == "minmax" || s == "min-max")
    return Normalization::min_max;
  if (s == "l2" || s == "l2-rows")
    return Normalization::l2_rows;
  throw ParamError("norm", "unknown normalization '" + std::string(s) + "'");
}

/// Returns a normalized copy. Constant columns map to 0 under min-max; all-zero
/// rows stay zero under l2-rows.
inline PointCloud normalize(const PointCloud &pc, Normalization scheme) {
  const std::size_t n = pc.rows(), d = pc.dims();
  std::vector<double> v = pc.values();
  switch (scheme) {
  case Normalization::none:
    break;
  case Normalization::min_max:
    for (std::size_t j = 0; j < d; ++j) {
      double lo = v[j], hi = v[j];
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, v[i * d + j]);
        hi = std::max(hi, v[i * d + j]);
      }
      const double range = hi - lo;
      for (std::size_t i = 0; i < n; ++i) {
        double &x = v[i * d + j];
        x = range > 0.0 ? std::clamp((x - lo) / range, 0.0, 1.0) : 0.0;
      }
    }
    break;
  case Normalization::l2_rows:
    for (std::size_t i = 0; i < n; ++i) {
      double ss = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        ss += v[i * d + j] * v[i * d + j];
      if (ss == 0.0)
        continue;
      const double norm = std::sqrt(ss);
      for (std::size_t j = 0; j < d; ++j)
        v[i * d + j] /= norm;
    }
    break;
  }
  return pc.with_values(std::move(v));
}

} // namespace mapper
