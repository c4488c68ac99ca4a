#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "mapper/clustering.hpp"
#include "mapper/cover.hpp"
#include "mapper/dataset.hpp"
#include "mapper/error.hpp"
#include "mapper/filters.hpp"

namespace mapper {

using NodeId = std::size_t;

struct MapperNode {
  NodeId id = 0;
  std::vector<std::size_t> element;  // per-axis interval index
  std::vector<std::size_t> rows;     // sorted
  std::map<std::string, double> stats;                                    // column -> mean
  std::map<std::string, std::map<std::string, std::size_t>> composition;  // column -> label -> count
  std::vector<double> filter_mean;

  bool operator==(const MapperNode &) const = default;
};

struct MapperEdge {
  NodeId s = 0;
  NodeId t = 0;
  std::size_t w = 0; // shared rows

  bool operator==(const MapperEdge &) const = default;
};

/// 1-skeleton of the nerve of the pullback-cluster cover.
struct MapperGraph {
  nlohmann::json manifest = nlohmann::json::object();
  std::vector<MapperNode> nodes;
  std::vector<MapperEdge> edges; // s < t, sorted by (s, t)

  bool operator==(const MapperGraph &) const = default;

  /// Sorted neighbour lists.
  std::vector<std::vector<NodeId>> adjacency() const {
    std::vector<std::vector<NodeId>> adj(nodes.size());
    for (const auto &e : edges) {
      adj[e.s].push_back(e.t);
      adj[e.t].push_back(e.s);
    }
    for (auto &a : adj)
      std::sort(a.begin(), a.end());
    return adj;
  }
};

/// |A ∩ B| of two ascending lists.
inline std::size_t intersection_size(const std::vector<std::size_t> &a,
                                     const std::vector<std::size_t> &b) {
  std::size_t i = 0, j = 0, c = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++c;
      ++i;
      ++j;
    }
  }
  return c;
}

/// Per-node mean of every numerical column and label counts of every
/// categorical column.
inline void fill_node_stats(MapperNode &node, const PointCloud &pc) {
  const auto &names = pc.numerical_names();
  std::vector<double> sum(pc.dims(), 0.0);
  for (auto r : node.rows) {
    auto x = pc.row(r);
    for (std::size_t j = 0; j < sum.size(); ++j)
      sum[j] += x[j];
  }
  node.stats.clear();
  for (std::size_t j = 0; j < sum.size(); ++j)
    node.stats[names[j]] = sum[j] / static_cast<double>(node.rows.size());
  node.composition.clear();
  const auto &cats = pc.categorical_names();
  for (std::size_t c = 0; c < cats.size(); ++c) {
    auto &counts = node.composition[cats[c]];
    for (auto r : node.rows)
      ++counts[pc.labels()[c][r]];
  }
}

/// One node per cluster, ids in (element, cluster order) order; an edge for
/// every pair of clusters from geometrically overlapping cover elements that
/// share at least one row. `pc` supplies the per-node statistics.
inline MapperGraph build_graph(const std::vector<PullbackClustering> &clusterings,
                               const PointCloud &pc, const FilterValues &fv, const Cover &cover,
                               nlohmann::json manifest = nlohmann::json::object()) {
  if (clusterings.size() != cover.size())
    throw ParamError("clusterings", "expected one clustering per cover element");
  MapperGraph g;
  g.manifest = std::move(manifest);

  std::vector<std::vector<NodeId>> element_nodes(cover.size());
  std::vector<std::size_t> sorted_elems(clusterings.size());
  for (std::size_t i = 0; i < clusterings.size(); ++i)
    sorted_elems[i] = i;
  std::sort(sorted_elems.begin(), sorted_elems.end(), [&](std::size_t a, std::size_t b) {
    return clusterings[a].element < clusterings[b].element;
  });
  for (std::size_t idx : sorted_elems) {
    const auto &pcl = clusterings[idx];
    if (pcl.element >= cover.size())
      throw ParamError("clusterings", "element index outside the cover");
    for (const auto &cluster : pcl.clusters) {
      if (cluster.empty())
        continue;
      MapperNode node;
      node.id = g.nodes.size();
      node.element = cover.element_axes(pcl.element);
      node.rows = cluster;
      fill_node_stats(node, pc);
      node.filter_mean.assign(fv.dims(), 0.0);
      for (auto r : node.rows)
        for (std::size_t a = 0; a < fv.dims(); ++a)
          node.filter_mean[a] += fv.at(r, a);
      for (auto &v : node.filter_mean)
        v /= static_cast<double>(node.rows.size());
      element_nodes[pcl.element].push_back(node.id);
      g.nodes.push_back(std::move(node));
    }
  }
  if (g.nodes.empty())
    throw DataError("empty mapper graph");

  // Overlapping partners per axis; element pairs are their products.
  std::vector<std::vector<std::vector<std::size_t>>> partners(cover.dims());
  for (std::size_t a = 0; a < cover.dims(); ++a) {
    const auto &ivs = cover.axes[a].intervals;
    partners[a].resize(ivs.size());
    for (std::size_t i = 0; i < ivs.size(); ++i)
      for (std::size_t j = 0; j < ivs.size(); ++j)
        if (ivs[i].intersects(ivs[j]))
          partners[a][i].push_back(j);
  }

  for (std::size_t k = 0; k < cover.size(); ++k) {
    if (element_nodes[k].empty())
      continue;
    const auto axes = cover.element_axes(k);
    std::vector<std::size_t> cand;
    if (cover.dims() == 1) {
      cand = partners[0][axes[0]];
    } else {
      for (auto i : partners[0][axes[0]])
        for (auto j : partners[1][axes[1]])
          cand.push_back(cover.element_index({i, j}));
    }
    for (auto k2 : cand) {
      if (k2 <= k)
        continue;
      for (NodeId u : element_nodes[k])
        for (NodeId v : element_nodes[k2]) {
          const auto w = intersection_size(g.nodes[u].rows, g.nodes[v].rows);
          if (w > 0)
            g.edges.push_back({std::min(u, v), std::max(u, v), w});
        }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const MapperEdge &a, const MapperEdge &b) {
    return std::tie(a.s, a.t) < std::tie(b.s, b.t);
  });
  return g;
}

} // namespace mapper
