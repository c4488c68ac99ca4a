#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "mapper/error.hpp"
#include "mapper/filters.hpp"

namespace mapper {

inline constexpr double kMaxOverlap = 0.95;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t axis = 0;
  std::size_t index = 0;

  bool contains(double v) const noexcept { return lo <= v && v <= hi; }
  bool intersects(const Interval &o) const noexcept { return lo <= o.hi && o.lo <= hi; }
};

/// Uniform overlapping intervals along one filter axis.
struct AxisCover {
  std::size_t n = 1;          // requested count
  double overlap = 0.0;       // p
  double f_min = 0.0;
  double f_max = 0.0;
  double length = 0.0;        // interval length
  bool degenerate = false;    // constant filter: single unit interval
  std::vector<Interval> intervals;

  /// Index range [first, last] of intervals that contain v; empty when first > last.
  std::pair<std::size_t, std::size_t> containing(double v) const {
    // lo and hi are both nondecreasing in k, so the hits are contiguous.
    auto first = std::partition_point(intervals.begin(), intervals.end(),
                                      [v](const Interval &iv) { return iv.hi < v; });
    auto last = std::partition_point(intervals.begin(), intervals.end(),
                                     [v](const Interval &iv) { return iv.lo <= v; });
    return {static_cast<std::size_t>(first - intervals.begin()),
            static_cast<std::size_t>(last - intervals.begin()) - 1};
  }
};

/// Cover of f(X): intervals for m = 1, row-major rectangles (axis 0 outer)
/// for m = 2.
struct Cover {
  std::vector<AxisCover> axes;
  std::vector<std::string> warnings;

  std::size_t dims() const noexcept { return axes.size(); }

  std::size_t size() const noexcept {
    std::size_t s = 1;
    for (const auto &a : axes)
      s *= a.intervals.size();
    return s;
  }

  /// Per-axis interval indices of element k.
  std::vector<std::size_t> element_axes(std::size_t k) const {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      idx[a] = k % axes[a].intervals.size();
      k /= axes[a].intervals.size();
    }
    return idx;
  }

  std::size_t element_index(const std::vector<std::size_t> &idx) const {
    std::size_t k = 0;
    for (std::size_t a = 0; a < axes.size(); ++a)
      k = k * axes[a].intervals.size() + idx[a];
    return k;
  }

  std::vector<Interval> element(std::size_t k) const {
    auto idx = element_axes(k);
    std::vector<Interval> out;
    for (std::size_t a = 0; a < axes.size(); ++a)
      out.push_back(axes[a].intervals[idx[a]]);
    return out;
  }

  /// Closed-set intersection of two elements on every axis.
  bool elements_overlap(std::size_t k1, std::size_t k2) const {
    auto a = element_axes(k1), b = element_axes(k2);
    for (std::size_t ax = 0; ax < axes.size(); ++ax)
      if (!axes[ax].intervals[a[ax]].intersects(axes[ax].intervals[b[ax]]))
        return false;
    return true;
  }
};

/// Interval length l = R / (n - (n-1) p); left ends a_k = f_min + k l (1-p).
inline AxisCover build_axis_cover(double f_min, double f_max, std::size_t n, double p,
                                  std::size_t axis) {
  if (n == 0)
    throw ParamError("n", "interval count must be at least 1");
  if (!(p >= 0.0 && p <= kMaxOverlap))
    throw ParamError("p", "overlap must be within [0, 0.95]");
  AxisCover ac;
  ac.n = n;
  ac.overlap = p;
  ac.f_min = f_min;
  ac.f_max = f_max;
  const double range = f_max - f_min;
  if (!(range > 0.0)) {
    ac.degenerate = true;
    ac.length = 1.0;
    ac.intervals.push_back({f_min - 0.5, f_min + 0.5, axis, 0});
    return ac;
  }
  const double nd = static_cast<double>(n);
  ac.length = range / (nd - (nd - 1.0) * p);
  const double step = ac.length * (1.0 - p);
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = f_min + static_cast<double>(k) * step;
    ac.intervals.push_back({lo, lo + ac.length, axis, k});
  }
  // Close rounding gaps so consecutive intervals always meet and f_max is covered.
  for (std::size_t k = 0; k + 1 < n; ++k)
    ac.intervals[k].hi = std::max(ac.intervals[k].hi, ac.intervals[k + 1].lo);
  ac.intervals.back().hi = std::max(ac.intervals.back().hi, f_max);
  return ac;
}

/// `n` and `p` hold one value per filter axis; a single value is broadcast to
/// every axis.
inline Cover build_cover(const FilterValues &fv, std::vector<std::size_t> n,
                         std::vector<double> p) {
  const std::size_t m = fv.dims();
  if (m == 0 || fv.rows == 0)
    throw ParamError("filters", "cover needs at least one filter value");
  if (n.size() == 1)
    n.resize(m, n[0]);
  if (p.size() == 1)
    p.resize(m, p[0]);
  if (n.size() != m)
    throw ParamError("n", "expected one interval count per filter axis");
  if (p.size() != m)
    throw ParamError("p", "expected one overlap per filter axis");
  Cover cover;
  for (std::size_t a = 0; a < m; ++a) {
    double lo = fv.at(0, a), hi = fv.at(0, a);
    for (std::size_t i = 1; i < fv.rows; ++i) {
      lo = std::min(lo, fv.at(i, a));
      hi = std::max(hi, fv.at(i, a));
    }
    cover.axes.push_back(build_axis_cover(lo, hi, n[a], p[a], a));
    if (cover.axes.back().degenerate)
      cover.warnings.push_back("filter axis " + std::to_string(a) +
                               " is constant; using a single interval");
  }
  return cover;
}

/// Rows of each cover element, ascending. Intervals are closed.
inline std::vector<std::vector<std::size_t>> membership(const FilterValues &fv,
                                                        const Cover &cover) {
  if (fv.dims() != cover.dims())
    throw ParamError("cover", "cover dimension does not match filter values");
  std::vector<std::vector<std::size_t>> members(cover.size());
  const std::size_t m = cover.dims();
  std::vector<std::pair<std::size_t, std::size_t>> ranges(m);
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < fv.rows; ++i) {
    bool any = true;
    for (std::size_t a = 0; a < m; ++a) {
      ranges[a] = cover.axes[a].containing(fv.at(i, a));
      if (ranges[a].first > ranges[a].second || ranges[a].second == static_cast<std::size_t>(-1))
        any = false;
    }
    if (!any)
      throw DataError("row " + std::to_string(i) + " is outside the cover");
    if (m == 1) {
      for (std::size_t k = ranges[0].first; k <= ranges[0].second; ++k)
        members[k].push_back(i);
      continue;
    }
    for (std::size_t k0 = ranges[0].first; k0 <= ranges[0].second; ++k0)
      for (std::size_t k1 = ranges[1].first; k1 <= ranges[1].second; ++k1) {
        idx[0] = k0;
        idx[1] = k1;
        members[cover.element_index(idx)].push_back(i);
      }
  }
  return members;
}

inline nlohmann::json to_json(const Cover &c) {
  nlohmann::json n = nlohmann::json::array(), p = nlohmann::json::array(),
                 range = nlohmann::json::array(), intervals = nlohmann::json::array();
  for (const auto &a : c.axes) {
    n.push_back(a.n);
    p.push_back(a.overlap);
    range.push_back({a.f_min, a.f_max});
    nlohmann::json ivs = nlohmann::json::array();
    for (const auto &iv : a.intervals)
      ivs.push_back({iv.lo, iv.hi});
    intervals.push_back(ivs);
  }
  return {{"n", n}, {"p", p}, {"range", range}, {"intervals", intervals}};
}

} // namespace mapper
