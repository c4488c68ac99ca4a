#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "mapper/clustering.hpp"
#include "mapper/cover.hpp"
#include "mapper/synthetic.hpp"
#include "oracles/oracles.hpp"

using namespace mapper;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

PullbackClustering run_matrix(const PointCloud &pc, const std::vector<std::size_t> &rows,
                              DbscanParams p) {
  auto m = pairwise_distances(pc, rows);
  return dbscan(rows, MatrixNeighbors(m), p);
}

PullbackClustering run_stream(const PointCloud &pc, const std::vector<std::size_t> &rows,
                              DbscanParams p) {
  auto block = gather_rows(pc, rows);
  return dbscan(rows, StreamingNeighbors(block, rows.size(), pc.dims()), p);
}

void expect_matches_oracle(const PullbackClustering &got, const oracle::Dbscan &want) {
  EXPECT_EQ(got.clusters, want.clusters);
  EXPECT_EQ(got.noise, want.noise);
}

/// Counts neighbour queries, to pin the two-pass contract.
struct CountingNeighbors {
  MatrixNeighbors inner;
  std::vector<int> *queries;
  template <class F> void for_each_within(std::size_t a, double eps, F &&f) {
    ++(*queries)[a];
    inner.for_each_within(a, eps, std::forward<F>(f));
  }
};

} // namespace

TEST(PairwiseDistances, ThreeFourFive) {
  auto pc = PointCloud::from_matrix({0, 0, 3, 4}, 2, 2);
  auto m = pairwise_distances(pc, all_rows(2));
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 1), 5.0);
  EXPECT_EQ(m(1, 0), 5.0);
  EXPECT_EQ(m(1, 1), 0.0);
}

TEST(PairwiseDistances, SingleRow) {
  auto pc = PointCloud::from_matrix({1, 2, 3}, 1, 3);
  auto m = pairwise_distances(pc, all_rows(1));
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m(0, 0), 0.0);
}

TEST(PairwiseDistances, MatchesDoubleLoopOracle) {
  auto pc = synthetic::uniform(100, 16, 12);
  auto rows = all_rows(100);
  auto want = oracle::distance_matrix(pc.values(), 16, rows);
  for (unsigned threads : {1u, 3u}) {
    auto m = pairwise_distances(pc, rows, threads);
    for (std::size_t a = 0; a < 100; ++a)
      for (std::size_t b = 0; b < 100; ++b) {
        EXPECT_NEAR(m(a, b), want[a][b], 1e-9);
        EXPECT_EQ(m(a, b), m(b, a));
      }
  }
}

TEST(PairwiseDistances, Errors) {
  auto pc = PointCloud::from_matrix({0, 1}, 2, 1);
  EXPECT_THROW(pairwise_distances(pc, std::vector<std::size_t>{}), ParamError);
  EXPECT_THROW(pairwise_distances(pc, std::vector<std::size_t>{0, 2}), ParamError);
}

TEST(Dbscan, TwoFarPairs) {
  auto pc = PointCloud::from_matrix({0, 0.1, 5, 5.1}, 4, 1);
  auto r = run_matrix(pc, all_rows(4), {0.2, 2});
  EXPECT_EQ(r.clusters, (std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}}));
  EXPECT_TRUE(r.noise.empty());
}

TEST(Dbscan, NoCorePoints) {
  auto pc = PointCloud::from_matrix({0, 10}, 2, 1);
  auto r = run_matrix(pc, all_rows(2), {1.0, 2});
  EXPECT_TRUE(r.clusters.empty());
  EXPECT_EQ(r.noise, (std::vector<std::size_t>{0, 1}));
}

TEST(Dbscan, InclusiveEpsAndSelfCount) {
  auto pc = PointCloud::from_matrix({0, 1}, 2, 1);
  // d == eps counts; each point has neighbourhood {self, other} = 2.
  EXPECT_EQ(run_matrix(pc, all_rows(2), {1.0, 2}).clusters.size(), 1u);
  // minPts 1: every point is core on its own.
  EXPECT_EQ(run_matrix(pc, all_rows(2), {0.5, 1}).clusters.size(), 2u);
}

TEST(Dbscan, BorderPointGoesToLowestCoreNeighbour) {
  // Row 4 is a border point exactly eps from a core of each cluster.
  const std::vector<double> a{0.0, 0.0625, 0.125, 0.25}, b{1.25, 1.375, 1.4375, 1.5};
  std::vector<double> v = a;
  v.push_back(0.75);
  v.insert(v.end(), b.begin(), b.end());
  auto r = run_matrix(PointCloud::from_matrix(v, 9, 1), all_rows(9), {0.5, 4});
  EXPECT_EQ(r.clusters, (std::vector<std::vector<std::size_t>>{{0, 1, 2, 3, 4}, {5, 6, 7, 8}}));

  std::vector<double> w = b;
  w.push_back(0.75);
  w.insert(w.end(), a.begin(), a.end());
  auto s = run_matrix(PointCloud::from_matrix(w, 9, 1), all_rows(9), {0.5, 4});
  EXPECT_EQ(s.clusters, (std::vector<std::vector<std::size_t>>{{0, 1, 2, 3, 4}, {5, 6, 7, 8}}));
  EXPECT_TRUE(s.noise.empty());
}

TEST(Dbscan, ThreeGaussianBlobsMatchOracle) {
  auto pc = synthetic::blobs(200, {{0, 0}, {10, 0}, {0, 10}}, 0.5, 4);
  auto rows = all_rows(200);
  auto r = run_matrix(pc, rows, {1.5, 4});
  EXPECT_EQ(r.clusters.size(), 3u);
  expect_matches_oracle(r, oracle::naive_dbscan(pc.values(), 2, rows, 1.5, 4));
}

TEST(Dbscan, GlobalRowsAreReported) {
  auto pc = PointCloud::from_matrix({0, 100, 0.1, 200, 0.2}, 5, 1);
  std::vector<std::size_t> rows{0, 2, 4};
  auto r = run_stream(pc, rows, {0.15, 2});
  EXPECT_EQ(r.clusters, (std::vector<std::vector<std::size_t>>{{0, 2, 4}}));
}

TEST(Dbscan, ExactlyOneQueryPerPointPerPass) {
  auto pc = synthetic::uniform(150, 3, 6);
  auto rows = all_rows(150);
  auto m = pairwise_distances(pc, rows);
  std::vector<int> q(150, 0);
  dbscan(rows, CountingNeighbors{MatrixNeighbors(m), &q}, {0.2, 4});
  for (int c : q)
    EXPECT_EQ(c, 2);
}

TEST(Dbscan, RandomInstancesMatchOracleInBothModes) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + rng() % 150, d = 1 + rng() % 5;
    auto pc = synthetic::uniform(n, d, rng());
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (rng() % 3)
        rows.push_back(i);
    if (rows.empty())
      continue;
    const double eps = 0.05 + (rng() % 1000) / 2500.0;
    const std::size_t mp = 1 + rng() % 8;
    auto want = oracle::naive_dbscan(pc.values(), d, rows, eps, mp);
    auto a = run_matrix(pc, rows, {eps, mp});
    auto b = run_stream(pc, rows, {eps, mp});
    expect_matches_oracle(a, want);
    EXPECT_EQ(a, b);
  }
}

TEST(Dbscan, InvariantsDisjointAndCovering) {
  auto pc = synthetic::uniform(400, 2, 8);
  auto rows = all_rows(400);
  auto r = run_stream(pc, rows, {0.05, 4});
  std::vector<int> seen(400, 0);
  for (const auto &c : r.clusters) {
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
    for (auto x : c)
      ++seen[x];
  }
  for (auto x : r.noise)
    ++seen[x];
  for (int s : seen)
    EXPECT_EQ(s, 1);
  for (std::size_t i = 1; i < r.clusters.size(); ++i)
    EXPECT_LT(r.clusters[i - 1].front(), r.clusters[i].front());
}

TEST(Dbscan, ParamValidation) {
  auto pc = PointCloud::from_matrix({0, 1}, 2, 1);
  try {
    run_matrix(pc, all_rows(2), {0.0, 2});
    FAIL();
  } catch (const ParamError &e) {
    EXPECT_EQ(e.field(), "eps");
  }
  try {
    run_matrix(pc, all_rows(2), {1.0, 0});
    FAIL();
  } catch (const ParamError &e) {
    EXPECT_EQ(e.field(), "min_pts");
  }
}

TEST(ClusterAll, SnowmanPullbacksOfFirstTwoIntervals) {
  const auto pc = synthetic::snowman(1000, 1);
  auto fv = evaluate_multi(pc, {FilterSpec::of_column("y")});
  auto cover = build_cover(fv, {6}, {0.30});
  auto run = cluster_all(pc, membership(fv, cover), {0.15, 3}, {}, 1);
  ASSERT_EQ(run.clusterings.size(), 6u);
  EXPECT_EQ(run.clusterings[0].clusters.size(), 1u);
  EXPECT_EQ(run.clusterings[1].clusters.size(), 2u);
}

TEST(ClusterAll, ModesAndThreadsGiveIdenticalOutput) {
  auto pc = synthetic::uniform(3000, 8, 31);
  auto fv = evaluate_multi(pc, {FilterSpec::of(FilterKind::l2_norm)});
  auto mem = membership(fv, build_cover(fv, {12}, {0.4}));
  DbscanParams p{0.45, 5};
  auto base = cluster_all(pc, mem, p, {DistanceMode::on_the_fly}, 1).clusterings;
  for (unsigned t : {1u, 4u, 8u}) {
    EXPECT_EQ(cluster_all(pc, mem, p, {DistanceMode::precomputed}, t).clusterings, base);
    EXPECT_EQ(cluster_all(pc, mem, p, {DistanceMode::on_the_fly}, t).clusterings, base);
  }
  for (std::size_t k = 0; k < base.size(); ++k) {
    EXPECT_EQ(base[k].element, k);
    auto want = oracle::naive_dbscan(pc.values(), 8, mem[k], p.eps, p.min_pts);
    expect_matches_oracle(base[k], want);
  }
}

TEST(ClusterAll, ThresholdAndBudgetFallBackToStreaming) {
  auto pc = synthetic::uniform(800, 3, 2);
  auto fv = evaluate_multi(pc, {FilterSpec::of_column("x0")});
  auto mem = membership(fv, build_cover(fv, {4}, {0.2}));
  DbscanParams p{0.1, 4};
  auto base = cluster_all(pc, mem, p, {DistanceMode::on_the_fly}, 1);
  EXPECT_EQ(base.stats.precomputed_elements, 0u);
  EXPECT_EQ(base.stats.peak_matrix_bytes, 0u);

  auto small = cluster_all(pc, mem, p, {DistanceMode::precomputed, 10}, 2);
  EXPECT_EQ(small.stats.precomputed_elements, 0u);
  EXPECT_EQ(small.clusterings, base.clusterings);

  MatrixBudget tiny(1024);
  auto capped = cluster_all(pc, mem, p, {DistanceMode::precomputed}, 2, &tiny);
  EXPECT_EQ(capped.stats.precomputed_elements, 0u);
  EXPECT_EQ(capped.clusterings, base.clusterings);

  std::size_t largest = 0;
  for (const auto &m : mem)
    largest = std::max(largest, m.size());
  MatrixBudget one(DistanceMatrix::bytes_for(largest));
  auto serial = cluster_all(pc, mem, p, {DistanceMode::precomputed}, 4, &one);
  EXPECT_EQ(serial.stats.precomputed_elements, mem.size());
  EXPECT_LE(serial.stats.peak_matrix_bytes, one.cap());
  EXPECT_EQ(serial.clusterings, base.clusterings);
}

TEST(ClusterAll, EmptyElementYieldsEmptyClustering) {
  auto pc = PointCloud::from_matrix({0, 1}, 2, 1);
  std::vector<std::vector<std::size_t>> mem{{0, 1}, {}};
  auto run = cluster_all(pc, mem, {2.0, 1}, {}, 2);
  EXPECT_EQ(run.clusterings[1].element, 1u);
  EXPECT_TRUE(run.clusterings[1].clusters.empty());
}

TEST(ClusterAll, StopTokenCancels) {
  auto pc = synthetic::uniform(200, 2, 1);
  auto fv = evaluate_multi(pc, {FilterSpec::of_column("x0")});
  auto mem = membership(fv, build_cover(fv, {5}, {0.2}));
  std::stop_source src;
  src.request_stop();
  EXPECT_THROW(cluster_all(pc, mem, {0.1, 3}, {}, 1, nullptr, src.get_token()), Cancelled);
}

TEST(ClusterAll, StrategyNamesAndBudgetEnv) {
  EXPECT_EQ(parse_distance_mode("vanilla"), DistanceMode::on_the_fly);
  EXPECT_EQ(parse_distance_mode("on-the-fly"), DistanceMode::on_the_fly);
  EXPECT_EQ(parse_distance_mode("precomputed"), DistanceMode::precomputed);
  EXPECT_THROW(parse_distance_mode("gpu"), ParamError);
  EXPECT_THROW(cluster_all(PointCloud::from_matrix({0}, 1, 1), {{0}}, {1.0, 1},
                           {DistanceMode::precomputed, 0}, 1),
               ParamError);
}
