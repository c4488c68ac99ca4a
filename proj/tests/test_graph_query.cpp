#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mapper/graph_query.hpp"
#include "mapper/synthetic.hpp"
#include "oracles/oracles.hpp"

using namespace mapper;

namespace {

using Edges = std::vector<std::pair<NodeId, NodeId>>;

MapperGraph make_graph(std::size_t n, const Edges &edges,
                       std::vector<std::vector<std::size_t>> rows = {}) {
  MapperGraph g;
  for (std::size_t i = 0; i < n; ++i) {
    MapperNode node;
    node.id = i;
    node.element = {i};
    node.rows = rows.empty() ? std::vector<std::size_t>{i} : rows[i];
    g.nodes.push_back(node);
  }
  for (auto [a, b] : edges)
    g.edges.push_back({std::min(a, b), std::max(a, b), 1});
  std::sort(g.edges.begin(), g.edges.end(),
            [](auto &x, auto &y) { return std::tie(x.s, x.t) < std::tie(y.s, y.t); });
  return g;
}

oracle::Adjacency adjacency(std::size_t n, const Edges &edges) {
  oracle::Adjacency adj(n);
  for (auto [a, b] : edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  return adj;
}

Edges random_edges(std::size_t n, double density, std::mt19937_64 &rng) {
  std::bernoulli_distribution coin(density);
  Edges e;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (coin(rng))
        e.emplace_back(a, b);
  return e;
}

} // namespace

TEST(Component, IsolatedNode) {
  auto g = make_graph(3, {{0, 1}});
  auto s = connected_component(g, 2);
  EXPECT_EQ(s.node_ids, (std::vector<NodeId>{2}));
  EXPECT_EQ(s.mode, SelectionMode::cluster);
}

TEST(Component, PathGraph) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(connected_component(g, 1).node_ids, (std::vector<NodeId>{0, 1, 2}));
}

TEST(Component, MultiComponentMatchesUnionFind) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 30;
    auto edges = random_edges(n, 0.08, rng);
    auto g = make_graph(n, edges);
    auto labels = oracle::component_labels(adjacency(n, edges));
    for (NodeId seed = 0; seed < n; ++seed) {
      std::vector<NodeId> want;
      for (NodeId v = 0; v < n; ++v)
        if (labels[v] == labels[seed])
          want.push_back(v);
      auto got = connected_component(g, seed).node_ids;
      EXPECT_EQ(got, want);
      for (NodeId member : got)
        EXPECT_EQ(connected_component(g, member).node_ids, got);
    }
  }
}

TEST(Component, UnknownId) {
  auto g = make_graph(2, {});
  try {
    connected_component(g, 5);
    FAIL();
  } catch (const ParamError &e) {
    EXPECT_EQ(e.field(), "node");
  }
}

TEST(ShortestPath, Basics) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(shortest_path(g, 1, 1), (std::vector<NodeId>{1}));
  EXPECT_EQ(shortest_path(g, 0, 2), (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(shortest_path(g, 2, 0), (std::vector<NodeId>{2, 1, 0}));
  EXPECT_THROW(shortest_path(g, 0, 3), ParamError);
}

TEST(ShortestPath, FourCycleTieGoesToSmallerId) {
  auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  EXPECT_EQ(shortest_path(g, 0, 2), (std::vector<NodeId>{0, 1, 2}));
}

TEST(ShortestPath, DisconnectedIsNone) {
  auto g = make_graph(4, {{0, 1}, {2, 3}});
  EXPECT_FALSE(shortest_path(g, 0, 3).has_value());
}

TEST(ShortestPath, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng() % 10;
    auto edges = random_edges(n, 0.1 + (rng() % 60) / 100.0, rng);
    auto g = make_graph(n, edges);
    auto adj = adjacency(n, edges);
    for (NodeId s = 0; s < n; ++s)
      for (NodeId e = 0; e < n; ++e)
        EXPECT_EQ(shortest_path(g, s, e), oracle::exhaustive_shortest_path(adj, s, e))
            << "trial " << t << " " << s << "->" << e;
  }
}

TEST(ExtendPath, Examples) {
  auto g = make_graph(6, {{0, 1}, {1, 2}, {2, 3}, {4, 5}});
  EXPECT_EQ(extend_path(g, {0, 1}, 1), (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(extend_path(g, {0, 1}, 3), (std::vector<NodeId>{0, 1, 2, 3}));
  EXPECT_FALSE(extend_path(g, {0, 1}, 5).has_value());
  try {
    extend_path(g, {0, 2}, 3);
    FAIL();
  } catch (const ParamError &e) {
    EXPECT_EQ(e.field(), "path");
  }
  EXPECT_THROW(extend_path(g, {0, 1}, 9), ParamError);
  EXPECT_THROW(extend_path(g, {}, 1), ParamError);
}

TEST(ExtendPath, ReplansOnlyFromOldEnd) {
  // 0-1-2 and 0-3; extending [1,0] to 2 walks back through 1.
  auto g = make_graph(4, {{0, 1}, {1, 2}, {0, 3}});
  EXPECT_EQ(extend_path(g, {1, 0}, 2), (std::vector<NodeId>{1, 0, 1, 2}));
}

TEST(Selection, MakeSelectionSortsAndDedups) {
  auto g = make_graph(5, {});
  auto s = make_selection(g, {3, 1, 3});
  EXPECT_EQ(s.node_ids, (std::vector<NodeId>{1, 3}));
  EXPECT_THROW(make_selection(g, {7}), ParamError);
}

TEST(SelectionDetails, SingleNodeVerbatim) {
  auto pc = synthetic::snowman(20, 1);
  auto g = make_graph(2, {{0, 1}}, {{1, 4, 7}, {7, 9}});
  auto d = selection_details(g, make_selection(g, {0}), pc);
  EXPECT_EQ(d.rows, (std::vector<std::size_t>{1, 4, 7}));
  ASSERT_EQ(d.nodes.size(), 1u);
  EXPECT_EQ(d.nodes[0], &g.nodes[0]);
}

TEST(SelectionDetails, UnionDeduplicatesSharedRows) {
  auto pc = synthetic::snowman(20, 1);
  auto g = make_graph(2, {{0, 1}}, {{1, 4, 7}, {7, 9}});
  auto d = selection_details(g, make_selection(g, {0, 1}), pc);
  EXPECT_EQ(d.rows.size(), 3u + 2u - 1u);
  std::size_t total = 0;
  for (const auto &[label, c] : d.labels.at("part"))
    total += c;
  EXPECT_EQ(total, d.rows.size());
}

TEST(SelectionDetails, UnionMatchesSetOracle) {
  std::mt19937_64 rng(3);
  auto pc = synthetic::snowman(100, 2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng() % 10;
    std::vector<std::vector<std::size_t>> rows(n);
    for (auto &r : rows) {
      std::set<std::size_t> s;
      const std::size_t k = 1 + rng() % 20;
      while (s.size() < k)
        s.insert(rng() % 100);
      r.assign(s.begin(), s.end());
    }
    auto g = make_graph(n, {}, rows);
    std::vector<NodeId> ids;
    std::set<std::size_t> want;
    for (NodeId i = 0; i < n; ++i)
      if (rng() % 2) {
        ids.push_back(i);
        want.insert(rows[i].begin(), rows[i].end());
      }
    auto d = selection_details(g, make_selection(g, ids), pc);
    EXPECT_EQ(d.rows, std::vector<std::size_t>(want.begin(), want.end()));
  }
}

TEST(SelectionDetails, RowsOutsideDatasetAreRejected) {
  auto pc = synthetic::snowman(5, 1);
  auto g = make_graph(1, {}, {{10}});
  EXPECT_THROW(selection_details(g, make_selection(g, {0}), pc), DataError);
}
