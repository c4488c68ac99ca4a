#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mapper/dataset.hpp"
#include "mapper/error.hpp"
#include "mapper/pipeline.hpp"
#include "mapper/version.hpp"

namespace mapper::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kInternal = 4 };

/// Raised when the two benchmark modes disagree.
class GraphMismatch : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Shortest round-trip decimal form with '.' replaced by 'p' (0.3 -> "0p3").
inline std::string file_token(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  for (auto &c : s)
    if (c == '.')
      c = 'p';
  return s;
}

inline std::string graph_file_name(std::size_t n, double p, double eps) {
  return "mapper_n" + std::to_string(n) + "_p" + file_token(p) + "_e" + file_token(eps) + ".json";
}

inline void write_file(const std::filesystem::path &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Wrangles `input` into `output` (header plus surviving rows, cells as
/// read) and returns the report.
inline WrangleReport wrangle_file(const std::string &input, const std::string &output) {
  const Table table = read_csv_file(input);
  auto w = wrangle(table);
  std::string text;
  auto append_row = [&](const std::vector<std::string> &cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j)
        text += ',';
      text += cells[j];
    }
    text += '\n';
  };
  append_row(table.header);
  for (auto i : w.report.kept_rows)
    append_row(table.rows[i]);
  write_file(output, text);
  return w.report;
}

struct SweepOptions {
  std::string input;
  std::string output_dir;
  Normalization norm = Normalization::none;
  std::vector<FilterSpec> filters;
  std::vector<std::size_t> intervals{10};
  std::vector<double> overlaps{0.3};
  std::vector<double> eps{0.5};
  std::size_t min_pts = 5;
  std::vector<unsigned> threads{std::max(1u, std::thread::hardware_concurrency())};
  DistanceStrategy strategy;
};

inline void validate(const SweepOptions &o) {
  if (o.filters.empty() || o.filters.size() > 2)
    throw ParamError("filter", "give one or two --filter specs");
  if (o.intervals.empty() || o.overlaps.empty() || o.eps.empty())
    throw ParamError("intervals", "parameter lists must be nonempty");
  if (o.threads.empty())
    throw ParamError("threads", "thread list must be nonempty");
  for (auto t : o.threads)
    if (t == 0)
      throw ParamError("threads", "thread counts must be positive");
}

inline MapperParams params_for(const SweepOptions &o, std::size_t n, double p, double eps) {
  MapperParams mp;
  mp.norm = o.norm;
  mp.filters = o.filters;
  mp.n = {n};
  mp.p = {p};
  mp.eps = eps;
  mp.min_pts = o.min_pts;
  validate(mp);
  return mp;
}

inline nlohmann::json run_manifest_header(const SweepOptions &o, const WrangleReport &report,
                                          std::size_t budget) {
  nlohmann::json filters = nlohmann::json::array();
  for (const auto &f : o.filters)
    filters.push_back(to_json(f));
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"input", o.input},
          {"norm", to_string(o.norm)},
          {"filters", filters},
          {"intervals", o.intervals},
          {"overlaps", o.overlaps},
          {"eps", o.eps},
          {"min_pts", o.min_pts},
          {"threads", o.threads},
          {"strategy", {{"mode", to_string(o.strategy.mode)}, {"threshold", o.strategy.threshold}}},
          {"memory_budget_bytes", budget},
          {"wrangle", to_json(report)}};
}

/// Parameter sweep: one graph file per (n, p, eps), plus manifest.json with
/// timings. Graph files carry no timing, so reruns are byte-identical.
inline nlohmann::json run_sweep(const SweepOptions &o, std::ostream *log = nullptr) {
  validate(o);
  // Validate every combination before doing any work.
  for (auto n : o.intervals)
    for (auto p : o.overlaps)
      for (auto e : o.eps)
        params_for(o, n, p, e);
  const auto w = wrangle(read_csv_file(o.input));
  const std::filesystem::path dir(o.output_dir);
  std::filesystem::create_directories(dir);

  const std::size_t budget_bytes = memory_budget_from_env();
  auto manifest = run_manifest_header(o, w.report, budget_bytes);
  nlohmann::json runs = nlohmann::json::array();
  for (auto n : o.intervals)
    for (auto p : o.overlaps)
      for (auto e : o.eps) {
        MatrixBudget budget(budget_bytes);
        ExecutionOptions exec;
        exec.strategy = o.strategy;
        exec.threads = o.threads.front();
        exec.budget = &budget;
        auto run = run_mapper(w.cloud, params_for(o, n, p, e), exec);
        const auto name = graph_file_name(n, p, e);
        write_file(dir / name, run.json);
        runs.push_back({{"file", name},
                        {"n", n},
                        {"p", p},
                        {"eps", e},
                        {"nodes", run.graph.nodes.size()},
                        {"edges", run.graph.edges.size()},
                        {"wall_seconds", run.wall_seconds},
                        {"peak_matrix_bytes", run.stats.peak_matrix_bytes},
                        {"warnings", run.warnings}});
        if (log)
          *log << name << ": " << run.graph.nodes.size() << " nodes, " << run.graph.edges.size()
               << " edges, " << run.wall_seconds << " s\n";
      }
  manifest["runs"] = runs;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

struct BenchRow {
  DistanceMode mode;
  unsigned threads;
  double wall_seconds;
  std::size_t peak_matrix_bytes;
  std::size_t working_set_bytes; // point cloud + peak per-element working memory
};

/// Times both distance modes for every thread count on the first (n, p, eps)
/// combination. Throws GraphMismatch, before any timing is reported, if any
/// two runs disagree on the graph.
inline std::vector<BenchRow> run_bench(const PointCloud &cloud, const SweepOptions &o) {
  validate(o);
  const auto mp = params_for(o, o.intervals.front(), o.overlaps.front(), o.eps.front());
  const std::size_t budget_bytes = memory_budget_from_env();
  std::vector<BenchRow> rows;
  std::string reference;
  for (auto mode : {DistanceMode::on_the_fly, DistanceMode::precomputed}) {
    for (auto t : o.threads) {
      MatrixBudget budget(budget_bytes);
      ExecutionOptions exec;
      exec.strategy = {mode, o.strategy.threshold};
      exec.threads = t;
      exec.budget = &budget;
      auto run = run_mapper(cloud, mp, exec);
      if (reference.empty())
        reference = run.json;
      else if (run.json != reference)
        throw GraphMismatch(std::string("graph mismatch: ") + to_string(mode) + " with " +
                            std::to_string(t) + " threads differs from the first run");
      rows.push_back({mode, t, run.wall_seconds, run.stats.peak_matrix_bytes,
                      cloud.bytes() + run.stats.peak_working_bytes});
    }
  }
  return rows;
}

inline void write_bench_csv(const std::vector<BenchRow> &rows, std::ostream &out) {
  out << "mode,threads,wall_seconds,peak_matrix_bytes,working_set_bytes\n";
  for (const auto &r : rows)
    out << (r.mode == DistanceMode::precomputed ? "precomputed" : "vanilla") << ',' << r.threads
        << ',' << r.wall_seconds << ',' << r.peak_matrix_bytes << ',' << r.working_set_bytes
        << '\n';
}

} // namespace mapper::cli
