#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <new>
#include <span>
#include <thread>
#include <vector>

#include "mapper/dataset.hpp"

namespace mapper {

/// Squared Euclidean distance with four interleaved accumulators combined in a
/// fixed order. Every distance in the library goes through this kernel, so a
/// given pair yields the same bits whichever code path asks for it.
/// Symmetric bit-for-bit: (a-b)^2 == (b-a)^2.
inline double squared_distance(const double *a, const double *b, std::size_t d) noexcept {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= d; k += 4) {
    const double t0 = a[k] - b[k];
    const double t1 = a[k + 1] - b[k + 1];
    const double t2 = a[k + 2] - b[k + 2];
    const double t3 = a[k + 3] - b[k + 3];
    acc0 += t0 * t0;
    acc1 += t1 * t1;
    acc2 += t2 * t2;
    acc3 += t3 * t3;
  }
  for (; k < d; ++k) {
    const double t = a[k] - b[k];
    acc0 += t * t;
  }
  return (acc0 + acc1) + (acc2 + acc3);
}

inline double distance(const double *a, const double *b, std::size_t d) noexcept {
  return std::sqrt(squared_distance(a, b, d));
}

inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
  return distance(a.data(), b.data(), a.size());
}

/// Dense symmetric matrix of pairwise distances between a list of rows.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t a, std::size_t b) const noexcept { return data_[a * n_ + b]; }
  double &operator()(std::size_t a, std::size_t b) noexcept { return data_[a * n_ + b]; }
  std::span<const double> row(std::size_t a) const noexcept { return {data_.data() + a * n_, n_}; }
  std::size_t bytes() const noexcept { return data_.size() * sizeof(double); }

  static std::size_t bytes_for(std::size_t n) noexcept { return n * n * sizeof(double); }

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Gathers the given rows into a contiguous block so distance loops stream
/// through memory.
inline std::vector<double> gather_rows(const PointCloud &pc, std::span<const std::size_t> rows) {
  const std::size_t d = pc.dims();
  std::vector<double> out(rows.size() * d);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    auto src = pc.row(rows[a]);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(a * d));
  }
  return out;
}

/// Full pairwise distance matrix of `rows`. The upper triangle is computed in
/// row blocks (in parallel when `threads > 1`) and mirrored.
/// Throws std::bad_alloc if the matrix cannot be allocated.
inline DistanceMatrix pairwise_distances(const PointCloud &pc, std::span<const std::size_t> rows,
                                         unsigned threads = 1) {
  if (rows.empty())
    throw ParamError("rows", "pairwise distances need at least one row");
  for (auto r : rows)
    if (r >= pc.rows())
      throw ParamError("rows", "row index out of range");
  const std::size_t n = rows.size(), d = pc.dims();
  const auto block = gather_rows(pc, rows);
  DistanceMatrix m(n);

  constexpr std::size_t kRowBlock = 64;
  auto fill = [&](std::size_t first_block, std::size_t stride) {
    for (std::size_t b = first_block; b * kRowBlock < n; b += stride) {
      const std::size_t lo = b * kRowBlock, hi = std::min(n, lo + kRowBlock);
      for (std::size_t i = lo; i < hi; ++i) {
        const double *xi = block.data() + i * d;
        for (std::size_t j = i + 1; j < n; ++j)
          m(i, j) = distance(xi, block.data() + j * d, d);
      }
    }
  };
  const std::size_t n_blocks = (n + kRowBlock - 1) / kRowBlock;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n_blocks));
  if (workers <= 1) {
    fill(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(fill, w, workers);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      m(j, i) = m(i, j);
  return m;
}

} // namespace mapper
