#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mapper/graph_json.hpp"
#include "mapper/pipeline.hpp"
#include "mapper/synthetic.hpp"
#include "oracles/oracles.hpp"

using namespace mapper;

namespace {

MapperRun snowman_run(std::size_t n = 1000) {
  MapperParams p;
  p.filters = {FilterSpec::of_column("y")};
  p.n = {6};
  p.p = {0.30};
  p.eps = 0.15;
  p.min_pts = 3;
  ExecutionOptions exec;
  exec.threads = 2;
  return run_mapper(synthetic::snowman(n, 1), p, exec);
}

std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> edge_tuples(const MapperGraph &g) {
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
  for (const auto &e : g.edges)
    out.emplace_back(e.s, e.t, e.w);
  return out;
}

std::vector<oracle::Rows> node_rows(const MapperGraph &g) {
  std::vector<oracle::Rows> out;
  for (const auto &n : g.nodes)
    out.push_back(n.rows);
  return out;
}

} // namespace

TEST(BuildGraph, SnowmanFirstTwoNodesAreConnected) {
  auto run = snowman_run();
  const auto &g = run.graph;
  ASSERT_GE(g.nodes.size(), 3u);
  EXPECT_EQ(g.nodes[0].element, (std::vector<std::size_t>{0}));
  EXPECT_EQ(g.nodes[1].element, (std::vector<std::size_t>{1}));
  EXPECT_EQ(g.nodes[2].element, (std::vector<std::size_t>{1}));
  EXPECT_TRUE(std::find(g.edges.begin(), g.edges.end(),
                        MapperEdge{0, 1, intersection_size(g.nodes[0].rows, g.nodes[1].rows)}) !=
              g.edges.end());
}

TEST(BuildGraph, EdgesMatchBruteForceNerve) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 25; ++t) {
    auto pc = synthetic::uniform(100 + rng() % 400, 1 + rng() % 4, rng());
    MapperParams p;
    p.filters = {FilterSpec::of_column("x0")};
    if (t % 2)
      p.filters.push_back(FilterSpec::of(FilterKind::l2_norm));
    p.n = {1 + rng() % 8};
    p.p = {(rng() % 90) / 100.0};
    p.eps = 0.1 + (rng() % 100) / 250.0;
    p.min_pts = 1 + rng() % 4;
    MapperRun run;
    try {
      run = run_mapper(pc, p, {});
    } catch (const DataError &) {
      continue; // everything noise
    }
    EXPECT_EQ(edge_tuples(run.graph), oracle::brute_force_nerve(node_rows(run.graph)))
        << "trial " << t;
  }
}

TEST(BuildGraph, DisjointClustersHaveNoEdge) {
  FilterValues fv{{0.0, 1.0}, 2, {FilterSpec::of_column("x")}};
  auto cover = build_cover(fv, {2}, {0.5});
  auto pc = PointCloud::from_matrix({0, 1}, 2, 1);
  std::vector<PullbackClustering> cl{{0, {{0}}, {}}, {1, {{1}}, {}}};
  auto g = build_graph(cl, pc, fv, cover);
  EXPECT_EQ(g.nodes.size(), 2u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(BuildGraph, EmptyGraphIsAnError) {
  FilterValues fv{{0.0, 1.0}, 2, {FilterSpec::of_column("x")}};
  auto cover = build_cover(fv, {2}, {0.5});
  auto pc = PointCloud::from_matrix({0, 1}, 2, 1);
  std::vector<PullbackClustering> cl{{0, {}, {0}}, {1, {}, {1}}};
  try {
    build_graph(cl, pc, fv, cover);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_STREQ(e.what(), "empty mapper graph");
  }
}

TEST(BuildGraph, NodeStatsAndComposition) {
  auto pc = synthetic::snowman(200, 3);
  FilterValues fv = evaluate_multi(pc, {FilterSpec::of_column("y")});
  auto cover = build_cover(fv, {1}, {0.0});
  std::vector<std::size_t> rows{0, 5, 9};
  std::vector<PullbackClustering> cl{{0, {rows}, {}}};
  auto g = build_graph(cl, pc, fv, cover);
  const auto &n = g.nodes[0];
  EXPECT_NEAR(n.stats.at("x"), (pc.at(0, 0) + pc.at(5, 0) + pc.at(9, 0)) / 3, 1e-15);
  EXPECT_NEAR(n.filter_mean[0], (pc.at(0, 1) + pc.at(5, 1) + pc.at(9, 1)) / 3, 1e-15);
  std::size_t total = 0;
  for (const auto &[label, c] : n.composition.at("part"))
    total += c;
  EXPECT_EQ(total, 3u);
}

TEST(BuildGraph, NonNoiseRowsAppearInNodes) {
  auto run = snowman_run();
  std::set<std::size_t> in_nodes;
  std::size_t total = 0;
  for (const auto &n : run.graph.nodes) {
    in_nodes.insert(n.rows.begin(), n.rows.end());
    total += n.rows.size();
  }
  EXPECT_GE(total, in_nodes.size());
  EXPECT_EQ(run.graph.manifest["noise_memberships"], 0);
  EXPECT_EQ(in_nodes.size(), 1000u);
}

TEST(BuildGraph, WideOverlapConnectsNonAdjacentIntervals) {
  // p > 0.5: interval 0 and interval 2 overlap, so their clusters may share rows.
  std::vector<double> v;
  for (int i = 0; i <= 100; ++i)
    v.push_back(i / 100.0);
  auto pc = PointCloud::from_matrix(v, v.size(), 1);
  MapperParams p;
  p.filters = {FilterSpec::of_column("x0")};
  p.n = {5};
  p.p = {0.8};
  p.eps = 0.02;
  p.min_pts = 2;
  auto run = run_mapper(pc, p, {});
  EXPECT_EQ(edge_tuples(run.graph), oracle::brute_force_nerve(node_rows(run.graph)));
  bool skip = false;
  for (const auto &e : run.graph.edges)
    skip |= run.graph.nodes[e.t].element[0] - run.graph.nodes[e.s].element[0] >= 2;
  EXPECT_TRUE(skip);
}

TEST(GraphJson, SingleNodeNoEdges) {
  FilterValues fv{{0.0}, 1, {FilterSpec::of_column("x0")}};
  auto cover = build_cover(fv, {1}, {0.0});
  auto pc = PointCloud::from_matrix({0}, 1, 1);
  auto g = build_graph({{0, {{0}}, {}}}, pc, fv, cover, {{"tool", "t"}});
  auto text = graph_to_json(g);
  EXPECT_EQ(text, R"({"edges":[],"manifest":{"tool":"t"},"nodes":[{"composition":{},"element":0,)"
                  R"("filter_mean":[0],"id":0,"rows":[0],"size":1,"stats":{"x0":0}}]})");
}

TEST(GraphJson, RoundTripIsByteStable) {
  auto run = snowman_run();
  auto parsed = parse_graph_json(run.json);
  EXPECT_EQ(graph_to_json(parsed), run.json);
  EXPECT_EQ(node_rows(parsed), node_rows(run.graph));
  EXPECT_EQ(parsed.edges, run.graph.edges);
  EXPECT_EQ(parse_graph_json(graph_to_json(parsed)), parsed);
}

TEST(GraphJson, TwoDimensionalElementsRoundTrip) {
  MapperParams p;
  p.filters = {FilterSpec::of_column("x"), FilterSpec::of_column("y")};
  p.n = {4};
  p.p = {0.3};
  p.eps = 0.2;
  p.min_pts = 2;
  auto run = run_mapper(synthetic::snowman(600, 2), p, {});
  EXPECT_EQ(run.graph.nodes[0].element.size(), 2u);
  EXPECT_EQ(graph_to_json(parse_graph_json(run.json)), run.json);
  EXPECT_EQ(edge_tuples(run.graph), oracle::brute_force_nerve(node_rows(run.graph)));
}

TEST(GraphJson, CanonicalNumbers) {
  using nlohmann::json;
  EXPECT_EQ(dump_canonical(json{{"b", 0.1}, {"a", 1}}), R"({"a":1,"b":0.1})");
  EXPECT_EQ(dump_canonical(json(1.0 / 3.0)), "0.333333333");
  EXPECT_EQ(dump_canonical(json(-0.0)), "0");
  EXPECT_EQ(dump_canonical(json(1e300 * 1e10)), "null");
  EXPECT_EQ(dump_canonical(json::array({1, "x", nullptr, true})), R"([1,"x",null,true])");
}

TEST(GraphJson, RejectsMalformed) {
  const std::string good = snowman_run(300).json;
  EXPECT_NO_THROW(parse_graph_json(good));
  EXPECT_THROW(parse_graph_json("{"), DataError);
  EXPECT_THROW(parse_graph_json(R"({"nodes":[],"edges":[]})"), DataError);
  auto j = nlohmann::json::parse(good);
  auto bad = j;
  bad["nodes"][0]["id"] = 7;
  EXPECT_THROW(parse_graph_json(bad.dump()), DataError);
  bad = j;
  bad["nodes"][0]["size"] = 0;
  EXPECT_THROW(parse_graph_json(bad.dump()), DataError);
  bad = j;
  bad["nodes"][0]["extra"] = 1;
  EXPECT_THROW(parse_graph_json(bad.dump()), DataError);
  bad = j;
  bad["edges"].push_back({{"s", 1}, {"t", 0}, {"w", 1}});
  EXPECT_THROW(parse_graph_json(bad.dump()), DataError);
}
