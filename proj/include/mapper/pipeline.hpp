#pragma once

#include <chrono>
#include <cmath>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mapper/clustering.hpp"
#include "mapper/cover.hpp"
#include "mapper/dataset.hpp"
#include "mapper/error.hpp"
#include "mapper/filters.hpp"
#include "mapper/graph_json.hpp"
#include "mapper/nerve.hpp"
#include "mapper/version.hpp"

namespace mapper {

/// Everything that determines a mapper graph.
struct MapperParams {
  Normalization norm = Normalization::none;
  std::vector<FilterSpec> filters;
  std::vector<std::size_t> n{10}; // per axis, or one value for all axes
  std::vector<double> p{0.3};
  double eps = 0.5;
  std::size_t min_pts = 5;
};

/// How to compute it. None of these settings change the graph.
struct ExecutionOptions {
  DistanceStrategy strategy;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  MatrixBudget *budget = nullptr; // null: fresh budget from MAPPER_MEM_BUDGET_BYTES
  std::stop_token stop;
};

struct MapperRun {
  MapperGraph graph;
  std::string json; // canonical graph bytes
  ClusterRunStats stats;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

inline void validate(const MapperParams &p) {
  if (p.filters.empty() || p.filters.size() > 2)
    throw ParamError("filters", "expected 1 or 2 filters");
  for (const auto &f : p.filters)
    validate(f);
  if (p.n.empty() || p.n.size() > p.filters.size())
    throw ParamError("n", "expected one interval count per filter axis");
  for (auto v : p.n)
    if (v < 1)
      throw ParamError("n", "interval count must be at least 1");
  if (p.p.empty() || p.p.size() > p.filters.size())
    throw ParamError("p", "expected one overlap per filter axis");
  for (auto v : p.p)
    if (!(v >= 0.0 && v <= kMaxOverlap))
      throw ParamError("p", "overlap must be within [0, 0.95]");
  validate(DbscanParams{p.eps, p.min_pts});
}

/// normalize -> filters -> cover -> DBSCAN per element -> nerve. `raw` supplies
/// node statistics; clustering runs on the normalized copy. The CLI and the
/// HTTP service both go through here, so equal parameters give equal bytes.
inline MapperRun run_mapper(const PointCloud &raw, const MapperParams &params,
                            const ExecutionOptions &exec = {}) {
  validate(params);
  const auto t0 = std::chrono::steady_clock::now();
  MapperRun out;

  const PointCloud pc = normalize(raw, params.norm);
  std::vector<FilterSpec> specs;
  for (const auto &f : params.filters)
    specs.push_back(resolve_defaults(pc, f));
  const unsigned threads = std::max(1u, exec.threads);
  const FilterValues fv = evaluate_multi(pc, specs, threads);
  const Cover cover = build_cover(fv, params.n, params.p);
  out.warnings = cover.warnings;
  const auto members = membership(fv, cover);

  auto run = cluster_all(pc, members, DbscanParams{params.eps, params.min_pts}, exec.strategy,
                         threads, exec.budget, exec.stop);
  out.stats = run.stats;

  nlohmann::json filters = nlohmann::json::array();
  for (const auto &f : specs)
    filters.push_back(to_json(f));
  std::size_t noise = 0;
  for (const auto &c : run.clusterings)
    noise += c.noise.size();
  nlohmann::json manifest = {{"tool", kToolName},
                             {"version", kToolVersion},
                             {"n_rows", raw.rows()},
                             {"norm", to_string(params.norm)},
                             {"filters", filters},
                             {"cover", to_json(cover)},
                             {"eps", params.eps},
                             {"min_pts", params.min_pts},
                             {"noise_memberships", noise}};
  const bool approx = std::any_of(specs.begin(), specs.end(), [](const FilterSpec &f) {
    return f.kind == FilterKind::density || f.kind == FilterKind::eccentricity;
  }) && pc.rows() > kFilterReferenceLimit;
  if (approx)
    manifest["filter_reference_rows"] = kFilterReferenceLimit;
  if (!cover.warnings.empty())
    manifest["warnings"] = cover.warnings;

  if (exec.stop.stop_requested())
    throw Cancelled();
  out.graph = build_graph(run.clusterings, raw, fv, cover, std::move(manifest));
  out.json = graph_to_json(out.graph);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

} // namespace mapper
