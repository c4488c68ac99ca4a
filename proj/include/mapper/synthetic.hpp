#pragma once

// Fixed-seed synthetic point clouds for demos, tests and benchmarks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mapper/dataset.hpp"

namespace mapper::synthetic {

struct CircleSample {
  PointCloud cloud;
  double max_arc_gap; // largest angular gap between consecutive samples
};

/// `n` points with uniformly random angles on the unit circle; columns x, y.
inline CircleSample circle(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<double> theta(n), values;
  for (auto &t : theta)
    t = angle(rng);
  for (double t : theta) {
    values.push_back(std::cos(t));
    values.push_back(std::sin(t));
  }
  auto sorted = theta;
  std::sort(sorted.begin(), sorted.end());
  double gap = sorted.front() + 2.0 * std::numbers::pi - sorted.back();
  for (std::size_t i = 1; i < sorted.size(); ++i)
    gap = std::max(gap, sorted[i] - sorted[i - 1]);
  std::vector<ColumnSpec> cols{{"x", ColumnKind::numerical, 0}, {"y", ColumnKind::numerical, 1}};
  return {PointCloud(std::move(values), n, std::move(cols)), gap};
}

/// Outline of a two-ball snowman: body radius 1 at the origin, head radius
/// 0.6 centred at (0, 1.5). Arc length is sampled uniformly, so the density
/// along the outline is constant. Columns x, y and a categorical "part".
inline PointCloud snowman(std::size_t n, std::uint64_t seed) {
  constexpr double body_r = 1.0, head_r = 0.6, head_y = 1.5;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double body_len = 2.0 * std::numbers::pi * body_r;
  const double head_len = 2.0 * std::numbers::pi * head_r;
  std::vector<double> values;
  std::vector<std::string> part;
  while (part.size() < n) {
    const bool on_body = unit(rng) * (body_len + head_len) < body_len;
    const double t = angle(rng);
    const double x = on_body ? body_r * std::cos(t) : head_r * std::cos(t);
    const double y = on_body ? body_r * std::sin(t) : head_y + head_r * std::sin(t);
    // Keep only the outer silhouette.
    if (on_body && std::hypot(x, y - head_y) < head_r)
      continue;
    if (!on_body && std::hypot(x, y) < body_r)
      continue;
    values.push_back(x);
    values.push_back(y);
    part.push_back(on_body ? "body" : "head");
  }
  std::vector<ColumnSpec> cols{{"x", ColumnKind::numerical, 0},
                               {"y", ColumnKind::numerical, 1},
                               {"part", ColumnKind::categorical, 2}};
  return PointCloud(std::move(values), n, std::move(cols), {std::move(part)});
}

/// `n` x `d` points uniform in [0, 1)^d; columns x0..x{d-1}.
inline PointCloud uniform(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> values(n * d);
  for (auto &v : values)
    v = u(rng);
  return PointCloud::from_matrix(std::move(values), n, d);
}

/// Isotropic Gaussian blobs with the given centres and standard deviation,
/// points assigned to blobs round-robin. Adds a categorical "blob" column.
inline PointCloud blobs(std::size_t n, const std::vector<std::vector<double>> &centres,
                        double sigma, std::uint64_t seed) {
  const std::size_t d = centres.front().size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> values;
  std::vector<std::string> label;
  for (std::size_t i = 0; i < n; ++i) {
    const auto &c = centres[i % centres.size()];
    for (std::size_t j = 0; j < d; ++j)
      values.push_back(c[j] + g(rng));
    label.push_back("b" + std::to_string(i % centres.size()));
  }
  std::vector<ColumnSpec> cols;
  for (std::size_t j = 0; j < d; ++j)
    cols.push_back({"x" + std::to_string(j), ColumnKind::numerical, j});
  cols.push_back({"blob", ColumnKind::categorical, d});
  return PointCloud(std::move(values), n, std::move(cols), {std::move(label)});
}

/// CSV text of a cloud: numerical then categorical columns, in column order,
/// with round-trip float formatting.
inline std::string to_csv(const PointCloud &pc) {
  std::string out;
  const auto &cols = pc.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j)
      out += ',';
    out += cols[j].name;
  }
  out += '\n';
  char buf[64];
  for (std::size_t i = 0; i < pc.rows(); ++i) {
    std::size_t num = 0, cat = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j)
        out += ',';
      if (cols[j].kind == ColumnKind::numerical) {
        std::snprintf(buf, sizeof buf, "%.17g", pc.at(i, num++));
        out += buf;
      } else {
        out += pc.labels()[cat++][i];
      }
    }
    out += '\n';
  }
  return out;
}

} // namespace mapper::synthetic
