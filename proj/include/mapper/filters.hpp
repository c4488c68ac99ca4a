#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mapper/dataset.hpp"
#include "mapper/distance.hpp"
#include "mapper/error.hpp"

namespace mapper {

enum class FilterKind { column, l2_norm, linf_norm, density, eccentricity };

inline const char *to_string(FilterKind k) {
  switch (k) {
  case FilterKind::column: return "column";
  case FilterKind::l2_norm: return "l2-norm";
  case FilterKind::linf_norm: return "linf-norm";
  case FilterKind::density: return "density";
  case FilterKind::eccentricity: return "eccentricity";
  }
  return "column";
}

/// A filter function f: X -> R. `bandwidth` (density) and `exponent`
/// (eccentricity) are optional; absent means "use the default".
struct FilterSpec {
  FilterKind kind = FilterKind::column;
  std::optional<std::string> column;
  std::optional<double> bandwidth;
  std::optional<double> exponent; // +inf means max

  static FilterSpec of_column(std::string name) {
    return {FilterKind::column, std::move(name), std::nullopt, std::nullopt};
  }
  static FilterSpec of(FilterKind k) { return {k, std::nullopt, std::nullopt, std::nullopt}; }

  bool operator==(const FilterSpec &) const = default;
};

inline void validate(const FilterSpec &spec) {
  const bool is_col = spec.kind == FilterKind::column;
  if (is_col != spec.column.has_value())
    throw ParamError("filters", is_col ? "column filter requires \"column\""
                                       : "\"column\" is only valid for column filters");
  if (spec.bandwidth && spec.kind != FilterKind::density)
    throw ParamError("filters", "\"bandwidth\" is only valid for density filters");
  if (spec.bandwidth && !(*spec.bandwidth > 0.0 && std::isfinite(*spec.bandwidth)))
    throw ParamError("filters", "bandwidth must be positive");
  if (spec.exponent && spec.kind != FilterKind::eccentricity)
    throw ParamError("filters", "\"p\" is only valid for eccentricity filters");
  if (spec.exponent && !(*spec.exponent >= 1.0))
    throw ParamError("filters", "eccentricity exponent must be in [1, inf]");
}

inline nlohmann::json to_json(const FilterSpec &s) {
  nlohmann::json j = {{"kind", to_string(s.kind)}};
  if (s.column)
    j["column"] = *s.column;
  if (s.bandwidth)
    j["bandwidth"] = *s.bandwidth;
  if (s.exponent) {
    if (std::isinf(*s.exponent))
      j["p"] = "inf";
    else
      j["p"] = *s.exponent;
  }
  return j;
}

inline FilterSpec filter_from_json(const nlohmann::json &j) {
  if (!j.is_object())
    throw ParamError("filters", "filter spec must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ParamError("filters", "filter spec needs a string \"kind\"");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "kind" && it.key() != "column" && it.key() != "bandwidth" && it.key() != "p")
      throw ParamError("filters", "unknown filter field \"" + it.key() + "\"");
  const auto kind = j["kind"].get<std::string>();
  FilterSpec s;
  if (kind == "column")
    s.kind = FilterKind::column;
  else if (kind == "l2-norm" || kind == "l2")
    s.kind = FilterKind::l2_norm;
  else if (kind == "linf-norm" || kind == "linf")
    s.kind = FilterKind::linf_norm;
  else if (kind == "density")
    s.kind = FilterKind::density;
  else if (kind == "eccentricity")
    s.kind = FilterKind::eccentricity;
  else
    throw ParamError("filters", "unknown filter kind \"" + kind + "\"");
  if (j.contains("column") && !j["column"].is_null()) {
    if (!j["column"].is_string())
      throw ParamError("filters", "\"column\" must be a string");
    s.column = j["column"].get<std::string>();
  }
  if (j.contains("bandwidth") && !j["bandwidth"].is_null()) {
    if (!j["bandwidth"].is_number())
      throw ParamError("filters", "\"bandwidth\" must be a number");
    s.bandwidth = j["bandwidth"].get<double>();
  }
  if (j.contains("p") && !j["p"].is_null()) {
    const auto &p = j["p"];
    if (p.is_string() && (p == "inf" || p == "infinity"))
      s.exponent = std::numeric_limits<double>::infinity();
    else if (p.is_number())
      s.exponent = p.get<double>();
    else
      throw ParamError("filters", "\"p\" must be a number or \"inf\"");
  }
  validate(s);
  return s;
}

/// N x m filter values, row-major.
struct FilterValues {
  std::vector<double> values;
  std::size_t rows = 0;
  std::vector<FilterSpec> specs;

  std::size_t dims() const noexcept { return specs.size(); }
  double at(std::size_t i, std::size_t axis) const { return values[i * dims() + axis]; }
};

/// Points above which density and eccentricity are evaluated against a
/// fixed-seed reference subsample instead of all points.
inline constexpr std::size_t kFilterReferenceLimit = 50'000;
inline constexpr std::size_t kBandwidthSampleSize = 1'000;
inline constexpr std::uint64_t kFilterSeed = 0x6d61707065725fULL;

/// Sorted ascending fixed-seed sample of row indices, or all rows when
/// `count >= rows`.
inline std::vector<std::size_t> fixed_sample(std::size_t rows, std::size_t count,
                                             std::uint64_t seed = kFilterSeed) {
  std::vector<std::size_t> all(rows);
  for (std::size_t i = 0; i < rows; ++i)
    all[i] = i;
  if (count >= rows)
    return all;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates keeps the draw independent of the library's std::sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (rows - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

/// Mean nearest-neighbour distance over a fixed 1,000-point subsample (all
/// points when N <= 1,000). Falls back to 1.0 when every sampled point
/// coincides.
inline double default_bandwidth(const PointCloud &pc) {
  const auto sample = fixed_sample(pc.rows(), kBandwidthSampleSize);
  if (sample.size() < 2)
    return 1.0;
  double total = 0.0;
  for (std::size_t a = 0; a < sample.size(); ++a) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < sample.size(); ++b)
      if (a != b)
        best = std::min(best, distance(pc.row(sample[a]), pc.row(sample[b])));
    total += best;
  }
  const double mean = total / static_cast<double>(sample.size());
  return mean > 0.0 ? mean : 1.0;
}

namespace detail {

template <class F> void parallel_rows(std::size_t n, unsigned threads, F &&body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads)
        body(i);
    });
}

} // namespace detail

/// Reference rows used by density/eccentricity sums.
inline std::vector<std::size_t> filter_reference_rows(const PointCloud &pc) {
  return fixed_sample(pc.rows(), kFilterReferenceLimit);
}

/// Evaluates one filter per point. Sums run over reference rows in ascending
/// order, so results do not depend on `threads`.
inline std::vector<double> evaluate(const PointCloud &pc, const FilterSpec &spec,
                                    unsigned threads = 1) {
  validate(spec);
  const std::size_t n = pc.rows(), d = pc.dims();
  std::vector<double> out(n);
  switch (spec.kind) {
  case FilterKind::column: {
    if (pc.has_categorical(*spec.column))
      throw ParamError("filters", "column '" + *spec.column + "' is categorical");
    auto idx = pc.numerical_index(*spec.column);
    if (!idx)
      throw ParamError("filters", "unknown column '" + *spec.column + "'");
    for (std::size_t i = 0; i < n; ++i)
      out[i] = pc.at(i, *idx);
    break;
  }
  case FilterKind::l2_norm:
    for (std::size_t i = 0; i < n; ++i) {
      double ss = 0.0;
      for (double x : pc.row(i))
        ss += x * x;
      out[i] = std::sqrt(ss);
    }
    break;
  case FilterKind::linf_norm:
    for (std::size_t i = 0; i < n; ++i) {
      double m = 0.0;
      for (double x : pc.row(i))
        m = std::max(m, std::abs(x));
      out[i] = m;
    }
    break;
  case FilterKind::density: {
    const double sigma = spec.bandwidth ? *spec.bandwidth : default_bandwidth(pc);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    const auto ref = filter_reference_rows(pc);
    detail::parallel_rows(n, threads, [&](std::size_t i) {
      const double *xi = pc.row(i).data();
      double s = 0.0;
      for (std::size_t r : ref)
        s += std::exp(-squared_distance(xi, pc.row(r).data(), d) * inv);
      out[i] = s;
    });
    break;
  }
  case FilterKind::eccentricity: {
    const double p = spec.exponent ? *spec.exponent : 1.0;
    const auto ref = filter_reference_rows(pc);
    detail::parallel_rows(n, threads, [&](std::size_t i) {
      const double *xi = pc.row(i).data();
      if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t r : ref)
          m = std::max(m, distance(xi, pc.row(r).data(), d));
        out[i] = m;
        return;
      }
      double s = 0.0;
      for (std::size_t r : ref)
        s += std::pow(distance(xi, pc.row(r).data(), d), p);
      out[i] = std::pow(s / static_cast<double>(ref.size()), 1.0 / p);
    });
    break;
  }
  }
  return out;
}

/// Copy of `spec` with default bandwidth / exponent filled in, so the values
/// actually used are recorded in manifests.
inline FilterSpec resolve_defaults(const PointCloud &pc, FilterSpec spec) {
  validate(spec);
  if (spec.kind == FilterKind::density && !spec.bandwidth)
    spec.bandwidth = default_bandwidth(pc);
  if (spec.kind == FilterKind::eccentricity && !spec.exponent)
    spec.exponent = 1.0;
  return spec;
}

/// Stacks 1 or 2 filters into an N x m matrix, in spec order.
inline FilterValues evaluate_multi(const PointCloud &pc, const std::vector<FilterSpec> &specs,
                                   unsigned threads = 1) {
  if (specs.empty() || specs.size() > 2)
    throw ParamError("filters", "expected 1 or 2 filters, got " + std::to_string(specs.size()));
  FilterValues fv;
  fv.rows = pc.rows();
  fv.specs = specs;
  fv.values.resize(pc.rows() * specs.size());
  for (std::size_t a = 0; a < specs.size(); ++a) {
    auto col = evaluate(pc, specs[a], threads);
    for (std::size_t i = 0; i < pc.rows(); ++i)
      fv.values[i * specs.size() + a] = col[i];
  }
  for (double v : fv.values)
    if (!std::isfinite(v))
      throw DataError("filter produced a non-finite value");
  return fv;
}

} // namespace mapper
