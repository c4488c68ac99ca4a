#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <new>
#include <numeric>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "mapper/dataset.hpp"
#include "mapper/dbscan.hpp"
#include "mapper/distance.hpp"
#include "mapper/error.hpp"

namespace mapper {

enum class DistanceMode { precomputed, on_the_fly };

inline const char *to_string(DistanceMode m) {
  return m == DistanceMode::precomputed ? "precomputed" : "on-the-fly";
}

inline DistanceMode parse_distance_mode(std::string_view s) {
  if (s == "precomputed")
    return DistanceMode::precomputed;
  if (s == "on-the-fly" || s == "vanilla")
    return DistanceMode::on_the_fly;
  throw ParamError("strategy", "unknown strategy '" + std::string(s) + "'");
}

inline constexpr std::size_t kDefaultPrecomputeThreshold = 20'000;
inline constexpr std::size_t kDefaultMemoryBudget = 8ULL << 30;

struct DistanceStrategy {
  DistanceMode mode = DistanceMode::precomputed;
  std::size_t threshold = kDefaultPrecomputeThreshold; // max element size to precompute
};

/// MAPPER_MEM_BUDGET_BYTES, or 8 GiB.
inline std::size_t memory_budget_from_env() {
  if (const char *s = std::getenv("MAPPER_MEM_BUDGET_BYTES"); s && *s) {
    char *end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && v > 0)
      return static_cast<std::size_t>(v);
  }
  return kDefaultMemoryBudget;
}

/// Caps the bytes of simultaneously materialized distance matrices. Callers
/// block in acquire() until their request fits.
class MatrixBudget {
public:
  explicit MatrixBudget(std::size_t cap = kDefaultMemoryBudget) : cap_(cap) {}

  std::size_t cap() const noexcept { return cap_; }
  bool admissible(std::size_t bytes) const noexcept { return bytes <= cap_; }

  void acquire(std::size_t bytes) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_use_ + bytes <= cap_; });
    in_use_ += bytes;
    peak_ = std::max(peak_, in_use_);
  }
  void release(std::size_t bytes) {
    {
      std::lock_guard lock(mu_);
      in_use_ -= bytes;
    }
    cv_.notify_all();
  }
  std::size_t peak() const {
    std::lock_guard lock(mu_);
    return peak_;
  }

private:
  std::size_t cap_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_use_ = 0;
  std::size_t peak_ = 0;
};

/// Execution statistics of one cluster_all call. Not part of the result
/// proper: clusterings never depend on these.
struct ClusterRunStats {
  std::size_t peak_matrix_bytes = 0;
  std::size_t peak_working_bytes = 0; // gathered row blocks + matrices + buffers
  std::size_t precomputed_elements = 0;
  std::size_t streamed_elements = 0;
};

struct ClusterRun {
  std::vector<PullbackClustering> clusterings;
  ClusterRunStats stats;
};

namespace detail {

class PeakCounter {
public:
  void add(std::size_t b) {
    const auto now = live_.fetch_add(b) + b;
    auto prev = peak_.load();
    while (prev < now && !peak_.compare_exchange_weak(prev, now)) {
    }
  }
  void sub(std::size_t b) { live_.fetch_sub(b); }
  std::size_t peak() const { return peak_.load(); }

private:
  std::atomic<std::size_t> live_{0};
  std::atomic<std::size_t> peak_{0};
};

} // namespace detail

/// Clusters every cover element with DBSCAN, one element per work item on up
/// to `threads` workers. In precomputed mode an element whose size is within
/// the threshold and whose matrix fits the budget is clustered from a
/// materialized distance matrix; otherwise distances are streamed. Results
/// are indexed by element and identical for every mode and thread count.
inline ClusterRun cluster_all(const PointCloud &pc,
                              const std::vector<std::vector<std::size_t>> &memberships,
                              const DbscanParams &params, const DistanceStrategy &strategy,
                              unsigned threads, MatrixBudget *budget = nullptr,
                              std::stop_token stop = {}) {
  validate(params);
  if (strategy.threshold < 1)
    throw ParamError("precompute_threshold", "threshold must be at least 1");
  MatrixBudget local_budget(memory_budget_from_env());
  MatrixBudget &mb = budget ? *budget : local_budget;

  const std::size_t n_elem = memberships.size();
  const std::size_t d = pc.dims();
  ClusterRun run;
  run.clusterings.resize(n_elem);

  // Largest elements first for load balance; output order is by element index.
  std::vector<std::size_t> order(n_elem);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return memberships[a].size() > memberships[b].size();
  });

  threads = std::max(1u, threads);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n_elem, 1)));
  const unsigned fill_threads = std::max(1u, threads / workers);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> n_pre{0}, n_stream{0};
  detail::PeakCounter working;
  std::mutex err_mu;
  std::exception_ptr error;
  std::atomic<bool> failed{false};

  auto work = [&] {
    try {
      while (!failed.load()) {
        const std::size_t slot = next.fetch_add(1);
        if (slot >= n_elem)
          return;
        if (stop.stop_requested())
          throw Cancelled();
        const std::size_t k = order[slot];
        const auto &rows = memberships[k];
        const std::size_t n = rows.size();
        if (n == 0) {
          run.clusterings[k].element = k;
          continue;
        }
        const std::size_t mat_bytes = DistanceMatrix::bytes_for(n);
        const bool want_matrix = strategy.mode == DistanceMode::precomputed &&
                                 n <= strategy.threshold && mb.admissible(mat_bytes);
        if (want_matrix) {
          mb.acquire(mat_bytes);
          bool ok = true;
          const std::size_t bytes = mat_bytes + n * d * sizeof(double);
          working.add(bytes);
          try {
            auto m = pairwise_distances(pc, rows, fill_threads);
            run.clusterings[k] = dbscan(rows, MatrixNeighbors(m), params, k);
          } catch (const std::bad_alloc &) {
            ok = false;
          }
          working.sub(bytes);
          mb.release(mat_bytes);
          if (ok) {
            ++n_pre;
            continue;
          }
        }
        const std::size_t block_bytes = (n * d + std::min(n, StreamingNeighbors::kBlock)) * sizeof(double);
        working.add(block_bytes);
        auto block = gather_rows(pc, rows);
        run.clusterings[k] = dbscan(rows, StreamingNeighbors(block, n, d), params, k);
        working.sub(block_bytes);
        ++n_stream;
      }
    } catch (...) {
      std::lock_guard lock(err_mu);
      if (!error)
        error = std::current_exception();
      failed = true;
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(work);
  }
  if (error)
    std::rethrow_exception(error);

  run.stats.peak_matrix_bytes = mb.peak();
  run.stats.peak_working_bytes = working.peak();
  run.stats.precomputed_elements = n_pre;
  run.stats.streamed_elements = n_stream;
  return run;
}

} // namespace mapper
