#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mapper/dataset.hpp"
#include "mapper/error.hpp"
#include "mapper/nerve.hpp"

namespace mapper {

enum class SelectionMode { nodes, cluster, path };

inline const char *to_string(SelectionMode m) {
  switch (m) {
  case SelectionMode::nodes: return "nodes";
  case SelectionMode::cluster: return "cluster";
  case SelectionMode::path: return "path";
  }
  return "nodes";
}

struct Selection {
  std::vector<NodeId> node_ids; // ascending, unique
  SelectionMode mode = SelectionMode::nodes;
};

inline void require_node(const MapperGraph &g, NodeId id) {
  if (id >= g.nodes.size())
    throw ParamError("node", "unknown node id " + std::to_string(id));
}

inline Selection make_selection(const MapperGraph &g, std::vector<NodeId> ids,
                                SelectionMode mode = SelectionMode::nodes) {
  for (auto id : ids)
    require_node(g, id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return {std::move(ids), mode};
}

/// Every node reachable from `seed`.
inline Selection connected_component(const MapperGraph &g, NodeId seed) {
  require_node(g, seed);
  const auto adj = g.adjacency();
  std::vector<char> seen(g.nodes.size(), 0);
  std::vector<NodeId> stack{seed}, out;
  seen[seed] = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (NodeId v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
  }
  std::sort(out.begin(), out.end());
  return {std::move(out), SelectionMode::cluster};
}

namespace detail {

inline std::vector<std::size_t> hop_distances(const std::vector<std::vector<NodeId>> &adj,
                                              NodeId from) {
  constexpr auto inf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(adj.size(), inf);
  std::deque<NodeId> q{from};
  dist[from] = 0;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop_front();
    for (NodeId v : adj[u])
      if (dist[v] == inf) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
  }
  return dist;
}

} // namespace detail

/// Minimum-hop path from `start` to `end`, lexicographically smallest among
/// all minimum-hop paths; nullopt when disconnected.
inline std::optional<std::vector<NodeId>> shortest_path(const MapperGraph &g, NodeId start,
                                                        NodeId end) {
  require_node(g, start);
  require_node(g, end);
  const auto adj = g.adjacency();
  const auto to_end = detail::hop_distances(adj, end);
  if (to_end[start] == std::numeric_limits<std::size_t>::max())
    return std::nullopt;
  std::vector<NodeId> path{start};
  NodeId u = start;
  while (u != end) {
    // adj is sorted, so the first neighbour one hop closer is the smallest.
    for (NodeId v : adj[u])
      if (to_end[v] + 1 == to_end[u]) {
        u = v;
        break;
      }
    path.push_back(u);
  }
  return path;
}

inline bool is_path(const MapperGraph &g, const std::vector<NodeId> &path) {
  if (path.empty())
    return false;
  for (auto id : path)
    if (id >= g.nodes.size())
      return false;
  const auto adj = g.adjacency();
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (!std::binary_search(adj[path[i]].begin(), adj[path[i]].end(), path[i + 1]))
      return false;
  return true;
}

/// `current` followed by the shortest path from its last node to `new_end`
/// (joint node not repeated); nullopt when unreachable.
inline std::optional<std::vector<NodeId>> extend_path(const MapperGraph &g,
                                                      const std::vector<NodeId> &current,
                                                      NodeId new_end) {
  require_node(g, new_end);
  for (auto id : current)
    require_node(g, id);
  if (!is_path(g, current))
    throw ParamError("path", "current selection is not a path in the graph");
  auto tail = shortest_path(g, current.back(), new_end);
  if (!tail)
    return std::nullopt;
  auto out = current;
  out.insert(out.end(), tail->begin() + 1, tail->end());
  return out;
}

struct SelectionDetails {
  Selection selection;
  std::vector<const MapperNode *> nodes;
  std::vector<std::size_t> rows; // sorted union
  std::map<std::string, std::map<std::string, std::size_t>> labels; // column -> label -> count over union
};

inline SelectionDetails selection_details(const MapperGraph &g, const Selection &sel,
                                          const PointCloud &pc) {
  SelectionDetails out;
  out.selection = sel;
  std::vector<std::size_t> rows;
  for (auto id : sel.node_ids) {
    require_node(g, id);
    out.nodes.push_back(&g.nodes[id]);
    rows.insert(rows.end(), g.nodes[id].rows.begin(), g.nodes[id].rows.end());
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  if (!rows.empty() && rows.back() >= pc.rows())
    throw DataError("graph rows do not belong to this dataset");
  const auto &cats = pc.categorical_names();
  for (std::size_t c = 0; c < cats.size(); ++c) {
    auto &counts = out.labels[cats[c]];
    for (auto r : rows)
      ++counts[pc.labels()[c][r]];
  }
  out.rows = std::move(rows);
  return out;
}

} // namespace mapper
