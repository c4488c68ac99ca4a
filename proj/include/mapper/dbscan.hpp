#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mapper/distance.hpp"
#include "mapper/error.hpp"

namespace mapper {

struct DbscanParams {
  double eps = 0.5;
  std::size_t min_pts = 5;
};

inline void validate(const DbscanParams &p) {
  if (!(p.eps > 0.0) || !std::isfinite(p.eps))
    throw ParamError("eps", "eps must be a positive finite number");
  if (p.min_pts < 1)
    throw ParamError("min_pts", "min_pts must be at least 1");
}

/// Clusters of one cover element. Row indices are global (PointCloud rows);
/// each cluster is sorted and clusters are ordered by their smallest row.
struct PullbackClustering {
  std::size_t element = 0;
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> noise;

  bool operator==(const PullbackClustering &) const = default;
};

/// Neighbour queries answered from a precomputed distance matrix.
class MatrixNeighbors {
public:
  explicit MatrixNeighbors(const DistanceMatrix &m) : m_(&m) {}
  std::size_t size() const noexcept { return m_->size(); }

  template <class F> void for_each_within(std::size_t a, double eps, F &&f) const {
    auto row = m_->row(a);
    for (std::size_t b = 0; b < row.size(); ++b)
      if (row[b] <= eps)
        f(b);
  }

private:
  const DistanceMatrix *m_;
};

/// Neighbour queries that recompute distances for every query, streaming the
/// candidates in blocks of 1,024 rows. Nothing quadratic is stored.
class StreamingNeighbors {
public:
  static constexpr std::size_t kBlock = 1024;

  /// `block` holds `n` gathered rows of dimension `d`, row-major.
  StreamingNeighbors(std::span<const double> block, std::size_t n, std::size_t d)
      : block_(block), n_(n), d_(d), buf_(std::min(n, kBlock)) {}
  std::size_t size() const noexcept { return n_; }

  template <class F> void for_each_within(std::size_t a, double eps, F &&f) {
    const double *xa = block_.data() + a * d_;
    for (std::size_t lo = 0; lo < n_; lo += kBlock) {
      const std::size_t hi = std::min(n_, lo + kBlock);
      for (std::size_t b = lo; b < hi; ++b)
        buf_[b - lo] = distance(xa, block_.data() + b * d_, d_);
      for (std::size_t b = lo; b < hi; ++b)
        if (buf_[b - lo] <= eps)
          f(b);
    }
  }

private:
  std::span<const double> block_;
  std::size_t n_;
  std::size_t d_;
  std::vector<double> buf_;
};

namespace detail {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
};

} // namespace detail

/// DBSCAN over `rows` (ascending global indices). The eps-neighbourhood is
/// closed and contains the point itself; a point is core when its
/// neighbourhood has at least min_pts members. Clusters are the eps-connected
/// components of core points. A border point joins the cluster of its
/// lowest-row core neighbour.
///
/// Two passes over the neighbour source: core flags, then linking. Each point
/// issues exactly one query per pass.
template <class Neighbors>
PullbackClustering dbscan(std::span<const std::size_t> rows, Neighbors &&nb,
                          const DbscanParams &params, std::size_t element = 0) {
  validate(params);
  const std::size_t n = rows.size();
  PullbackClustering out;
  out.element = element;
  if (n == 0)
    return out;

  std::vector<char> core(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t count = 0;
    nb.for_each_within(a, params.eps, [&](std::size_t) { ++count; });
    core[a] = count >= params.min_pts;
  }

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  detail::DisjointSets sets(n);
  std::vector<std::size_t> anchor(n, kNone); // border point -> lowest core neighbour
  for (std::size_t a = 0; a < n; ++a) {
    if (core[a]) {
      nb.for_each_within(a, params.eps, [&](std::size_t b) {
        if (b > a && core[b])
          sets.unite(a, b);
      });
    } else {
      nb.for_each_within(a, params.eps, [&](std::size_t b) {
        if (core[b] && b < anchor[a])
          anchor[a] = b;
      });
    }
  }

  // Local indices are in row order, so a cluster's first local member is
  // also its smallest row.
  std::vector<std::size_t> label(n, kNone);
  std::vector<std::size_t> root_label(n, kNone);
  std::vector<std::size_t> first_member;
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t root;
    if (core[a])
      root = sets.find(a);
    else if (anchor[a] != kNone)
      root = sets.find(anchor[a]);
    else
      continue;
    if (root_label[root] == kNone) {
      root_label[root] = first_member.size();
      first_member.push_back(a);
    }
    label[a] = root_label[root];
  }
  out.clusters.resize(first_member.size());
  for (std::size_t a = 0; a < n; ++a) {
    if (label[a] == kNone)
      out.noise.push_back(rows[a]);
    else
      out.clusters[label[a]].push_back(rows[a]);
  }
  return out;
}

} // namespace mapper
