#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mapper/dataset.hpp"
#include "mapper/error.hpp"
#include "mapper/stats.hpp"

namespace mapper {

/// Dense square matrix helpers for the small systems in this module.
namespace linalg {

using Matrix = std::vector<std::vector<double>>;

/// Lower Cholesky factor of a symmetric positive definite matrix. Throws
/// DataError when a pivot is not positive relative to the matrix scale.
inline Matrix cholesky(const Matrix &a) {
  const std::size_t n = a.size();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max(scale, std::abs(a[i][i]));
  Matrix l(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double s = a[j][j];
    for (std::size_t k = 0; k < j; ++k)
      s -= l[j][k] * l[j][k];
    if (!(s > 1e-12 * scale))
      throw DataError("singular design matrix");
    l[j][j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      double t = a[i][j];
      for (std::size_t k = 0; k < j; ++k)
        t -= l[i][k] * l[j][k];
      l[i][j] = t / l[j][j];
    }
  }
  return l;
}

/// Solves L L^T x = b.
inline std::vector<double> cholesky_solve(const Matrix &l, std::vector<double> b) {
  const std::size_t n = l.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k)
      b[i] -= l[i][k] * b[k];
    b[i] /= l[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k)
      b[i] -= l[k][i] * b[k];
    b[i] /= l[i][i];
  }
  return b;
}

inline Matrix cholesky_inverse(const Matrix &l) {
  const std::size_t n = l.size();
  Matrix inv(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    auto col = cholesky_solve(l, std::move(e));
    for (std::size_t i = 0; i < n; ++i)
      inv[i][j] = col[i];
  }
  return inv;
}

struct EigenDecomposition {
  std::vector<double> values;       // descending
  std::vector<std::vector<double>> vectors; // vectors[k] is the k-th eigenvector
};

/// Cyclic Jacobi eigensolver for a symmetric matrix. Sweeps rotate away every
/// off-diagonal entry until the off-diagonal mass is negligible.
inline EigenDecomposition jacobi_eigen(Matrix a) {
  const std::size_t n = a.size();
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    v[i][i] = 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      total += a[i][j] * a[i][j];
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        off += a[i][j] * a[i][j];
    if (off <= 1e-30 * total || off == 0.0)
      break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0)
          continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenDecomposition out;
  for (auto k : order) {
    out.values.push_back(a[k][k]);
    std::vector<double> vec(n);
    for (std::size_t i = 0; i < n; ++i)
      vec[i] = v[i][k];
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

} // namespace linalg

namespace detail {

inline std::vector<std::size_t> resolve_rows(const PointCloud &pc,
                                             std::span<const std::size_t> rows) {
  std::vector<std::size_t> out(rows.begin(), rows.end());
  if (out.empty()) {
    out.resize(pc.rows());
    std::iota(out.begin(), out.end(), 0);
  }
  for (auto r : out)
    if (r >= pc.rows())
      throw ParamError("rows", "row index " + std::to_string(r) + " out of range");
  return out;
}

inline std::size_t resolve_column(const PointCloud &pc, const std::string &name,
                                  const char *field) {
  if (pc.has_categorical(name))
    throw ParamError(field, "column '" + name + "' is categorical");
  auto idx = pc.numerical_index(name);
  if (!idx)
    throw ParamError(field, "unknown column '" + name + "'");
  return *idx;
}

} // namespace detail

struct RegressionTerm {
  std::string name; // "const" for the intercept
  double coef = 0.0;
  double std_err = 0.0;
  double t = 0.0;
  double p = 1.0;
};

/// OLS fit. terms[0] is the intercept, followed by the regressors in order.
struct RegressionResult {
  std::string dependent;
  std::vector<RegressionTerm> terms;
  double r_squared = 0.0;
  std::size_t n_observations = 0;
  std::size_t df_resid = 0;
};

/// Ordinary least squares with intercept via the normal equations.
/// Standard errors from sigma^2 (X^T X)^{-1} with sigma^2 = RSS / (n - k - 1);
/// two-sided p-values from Student's t with n - k - 1 degrees of freedom.
/// `rows` empty means all rows.
inline RegressionResult linear_regression(const PointCloud &pc, std::span<const std::size_t> rows,
                                          const std::string &dependent,
                                          const std::vector<std::string> &independents) {
  if (independents.empty())
    throw ParamError("independents", "at least one regressor is required");
  const auto sel = detail::resolve_rows(pc, rows);
  const std::size_t y_col = detail::resolve_column(pc, dependent, "dependent");
  std::vector<std::size_t> x_cols;
  for (const auto &name : independents)
    x_cols.push_back(detail::resolve_column(pc, name, "independents"));
  const std::size_t n = sel.size(), k = x_cols.size(), p = k + 1;
  if (n <= p)
    throw DataError("too few rows: need more than " + std::to_string(p));

  auto x_at = [&](std::size_t obs, std::size_t term) {
    return term == 0 ? 1.0 : pc.at(sel[obs], x_cols[term - 1]);
  };
  linalg::Matrix xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = pc.at(sel[i], y_col);
    for (std::size_t a = 0; a < p; ++a) {
      const double xa = x_at(i, a);
      xty[a] += xa * y;
      for (std::size_t b = 0; b <= a; ++b)
        xtx[a][b] += xa * x_at(i, b);
    }
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      xtx[a][b] = xtx[b][a];

  const auto l = linalg::cholesky(xtx);
  const auto beta = linalg::cholesky_solve(l, xty);
  const auto inv = linalg::cholesky_inverse(l);

  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    y_mean += pc.at(sel[i], y_col);
  y_mean /= static_cast<double>(n);
  double rss = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = pc.at(sel[i], y_col);
    double fit = 0.0;
    for (std::size_t a = 0; a < p; ++a)
      fit += beta[a] * x_at(i, a);
    rss += (y - fit) * (y - fit);
    tss += (y - y_mean) * (y - y_mean);
  }

  RegressionResult out;
  out.dependent = dependent;
  out.n_observations = n;
  out.df_resid = n - p;
  // A constant response has nothing to explain.
  out.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 0.0;
  const double dof = static_cast<double>(out.df_resid);
  const double sigma2 = rss / dof;
  for (std::size_t a = 0; a < p; ++a) {
    RegressionTerm term;
    term.name = a == 0 ? "const" : independents[a - 1];
    term.coef = beta[a];
    term.std_err = std::sqrt(std::max(0.0, sigma2 * inv[a][a]));
    if (term.std_err > 0.0) {
      term.t = term.coef / term.std_err;
      term.p = stats::student_t_two_sided_p(term.t, dof);
    } else {
      term.t = term.coef == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), term.coef);
      term.p = term.coef == 0.0 ? 1.0 : 0.0;
    }
    out.terms.push_back(term);
  }
  return out;
}

struct PcaResult {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> components; // k unit vectors over `columns`
  std::vector<double> explained_variance;      // descending
  double total_variance = 0.0;
  std::vector<double> mean;                    // per column, over the selection
  std::vector<std::vector<double>> projected;  // one k-vector per selected row
};

/// PCA of the selected rows over `columns` (all numerical columns when empty).
/// Each component's largest-magnitude entry is made positive.
inline PcaResult pca(const PointCloud &pc, std::span<const std::size_t> rows, std::size_t k,
                     std::vector<std::string> columns = {}) {
  const auto sel = detail::resolve_rows(pc, rows);
  if (columns.empty())
    columns = pc.numerical_names();
  std::vector<std::size_t> cols;
  for (const auto &c : columns)
    cols.push_back(detail::resolve_column(pc, c, "columns"));
  const std::size_t d = cols.size(), n = sel.size();
  if (k == 0 || k > d)
    throw ParamError("k", "k must be within [1, " + std::to_string(d) + "]");
  if (n < 2)
    throw DataError("degenerate selection: PCA needs at least 2 rows");

  PcaResult out;
  out.columns = columns;
  out.mean.assign(d, 0.0);
  for (auto r : sel)
    for (std::size_t j = 0; j < d; ++j)
      out.mean[j] += pc.at(r, cols[j]);
  for (auto &m : out.mean)
    m /= static_cast<double>(n);

  linalg::Matrix cov(d, std::vector<double>(d, 0.0));
  std::vector<double> centered(d);
  for (auto r : sel) {
    for (std::size_t j = 0; j < d; ++j)
      centered[j] = pc.at(r, cols[j]) - out.mean[j];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b <= a; ++b)
        cov[a][b] += centered[a] * centered[b];
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      cov[a][b] /= static_cast<double>(n - 1);
      cov[b][a] = cov[a][b];
    }
  for (std::size_t a = 0; a < d; ++a)
    out.total_variance += cov[a][a];

  auto eig = linalg::jacobi_eigen(cov);
  for (std::size_t c = 0; c < k; ++c) {
    auto vec = eig.vectors[c];
    std::size_t big = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (std::abs(vec[j]) > std::abs(vec[big]))
        big = j;
    if (vec[big] < 0.0)
      for (auto &x : vec)
        x = -x;
    out.components.push_back(std::move(vec));
    out.explained_variance.push_back(std::max(0.0, eig.values[c]));
  }
  for (auto r : sel) {
    std::vector<double> coords(k, 0.0);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < d; ++j)
        coords[c] += (pc.at(r, cols[j]) - out.mean[j]) * out.components[c][j];
    out.projected.push_back(std::move(coords));
  }
  return out;
}

namespace detail {
inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}
} // namespace detail

/// Table layout: one row per term (const first) with coef / std err / t / p.
inline nlohmann::json to_json(const RegressionResult &r) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto &t : r.terms)
    table.push_back({{"term", t.name},
                     {"coef", detail::finite_or_null(t.coef)},
                     {"std_err", detail::finite_or_null(t.std_err)},
                     {"t", detail::finite_or_null(t.t)},
                     {"p", detail::finite_or_null(t.p)}});
  return {{"kind", "regression"},
          {"dependent", r.dependent},
          {"table", table},
          {"r_squared", r.r_squared},
          {"n_observations", r.n_observations},
          {"df_resid", r.df_resid}};
}

inline nlohmann::json to_json(const PcaResult &r) {
  return {{"kind", "pca"},
          {"columns", r.columns},
          {"components", r.components},
          {"explained_variance", r.explained_variance},
          {"total_variance", r.total_variance},
          {"mean", r.mean},
          {"projected", r.projected}};
}

} // namespace mapper
