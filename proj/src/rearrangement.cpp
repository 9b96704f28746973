#include "mixcenter/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixcenter/errors.hpp"

namespace mixcenter {

QuantileMatrix::QuantileMatrix(const std::vector<std::vector<double>>& columns) {
  n_ = columns.size();
  if (n_ == 0) throw DomainError("QuantileMatrix: at least one column required");
  m_ = columns.front().size();
  if (m_ == 0) throw DomainError("QuantileMatrix: empty column");
  values_.reserve(m_ * n_);
  origin_.reserve(m_ * n_);
  for (const auto& col : columns) {
    if (col.size() != m_) throw DomainError("QuantileMatrix: columns differ in length");
    for (std::size_t i = 0; i < m_; ++i) {
      values_.push_back(col[i]);
      origin_.push_back(static_cast<std::uint32_t>(i));
    }
  }
}

std::vector<double> QuantileMatrix::column(std::size_t j) const {
  return {values_.begin() + static_cast<std::ptrdiff_t>(j * m_),
          values_.begin() + static_cast<std::ptrdiff_t>((j + 1) * m_)};
}

std::vector<double> QuantileMatrix::row(std::size_t i) const {
  std::vector<double> r(n_);
  for (std::size_t j = 0; j < n_; ++j) r[j] = (*this)(i, j);
  return r;
}

std::vector<double> QuantileMatrix::row_sums() const {
  std::vector<double> s(m_, 0.0);
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = 0; i < m_; ++i) s[i] += values_[j * m_ + i];
  return s;
}

double QuantileMatrix::spread() const {
  const auto s = row_sums();
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return *hi - *lo;
}

void QuantileMatrix::permute_column(std::size_t j, const std::vector<std::size_t>& perm) {
  std::vector<double> v(m_);
  std::vector<std::uint32_t> o(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    v[i] = values_[j * m_ + perm[i]];
    o[i] = origin_[j * m_ + perm[i]];
  }
  std::copy(v.begin(), v.end(), values_.begin() + static_cast<std::ptrdiff_t>(j * m_));
  std::copy(o.begin(), o.end(), origin_.begin() + static_cast<std::ptrdiff_t>(j * m_));
}

void QuantileMatrix::swap_entries(std::size_t j, std::size_t a, std::size_t b) {
  std::swap(values_[j * m_ + a], values_[j * m_ + b]);
  std::swap(origin_[j * m_ + a], origin_[j * m_ + b]);
}

std::vector<double> discretize(const Distribution& mu, std::size_t m) {
  if (m < 2) throw DomainError("discretize: m must be at least 2");
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = mu.quantile((static_cast<double>(j) + 0.5) / static_cast<double>(m));
  return out;
}

double default_spread_tol(const QuantileMatrix& matrix) {
  double total = 0.0;
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    const auto col = matrix.column(j);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    total += *hi - *lo;
  }
  return 2.0 * total / static_cast<double>(matrix.rows());
}

RaResult ra_flatten(QuantileMatrix matrix, const RaOptions& opt) {
  const std::size_t m = matrix.rows(), n = matrix.cols();
  RaResult res;
  const double tol = opt.spread_tol >= 0.0 ? opt.spread_tol : default_spread_tol(matrix);
  if (n < 2) {
    res.spread = matrix.spread();
    res.converged = true;
    res.matrix = std::move(matrix);
    return res;
  }
  if (opt.shuffle_initial) {
    Rng rng = substream(opt.seed, "ra_initial");
    std::vector<std::size_t> perm(m);
    for (std::size_t j = 0; j < n; ++j) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(perm));
      matrix.permute_column(j, perm);
    }
  }

  res.spread = matrix.spread();
  res.matrix = matrix;
  std::vector<double> sums = matrix.row_sums();
  std::vector<std::size_t> by_rest(m), by_value(m), perm(m);
  for (int sweep = 1; sweep <= opt.max_sweeps && res.spread > tol; ++sweep) {
    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> rest(m);
      for (std::size_t i = 0; i < m; ++i) rest[i] = sums[i] - matrix(i, j);
      std::iota(by_rest.begin(), by_rest.end(), std::size_t{0});
      std::stable_sort(by_rest.begin(), by_rest.end(), [&](std::size_t a, std::size_t b) { return rest[a] < rest[b]; });
      // Largest values of column j go to the rows with the smallest rest.
      std::iota(by_value.begin(), by_value.end(), std::size_t{0});
      std::stable_sort(by_value.begin(), by_value.end(),
                       [&](std::size_t a, std::size_t b) { return matrix(a, j) > matrix(b, j); });
      for (std::size_t k = 0; k < m; ++k) perm[by_rest[k]] = by_value[k];
      for (std::size_t i = 0; i < m; ++i)
        if (matrix(perm[i], j) != matrix(i, j)) {
          changed = true;
          break;
        }
      matrix.permute_column(j, perm);
      for (std::size_t i = 0; i < m; ++i) sums[i] = rest[i] + matrix(i, j);
    }
    const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
    const double spread = *hi - *lo;
    if (spread < res.spread) {
      res.spread = spread;
      res.matrix = matrix;
    }
    res.spread_history.push_back(res.spread);
    res.sweeps = sweep;
    if (!changed) break;
  }
  res.converged = res.spread <= tol;
  return res;
}

double balance_rows(QuantileMatrix& matrix, int max_steps) {
  const std::size_t m = matrix.rows(), n = matrix.cols();
  if (n < 2 || m < 2) return matrix.spread();
  std::vector<double> sums = matrix.row_sums();
  const double mean = std::accumulate(sums.begin(), sums.end(), 0.0) / static_cast<double>(m);
  for (int step = 0; step < max_steps; ++step) {
    const auto [lo_it, hi_it] = std::minmax_element(sums.begin(), sums.end());
    const std::size_t a = static_cast<std::size_t>(hi_it - sums.begin());
    const std::size_t b = static_cast<std::size_t>(lo_it - sums.begin());
    const double da = sums[a] - mean, db = sums[b] - mean;
    const double before = std::max(std::abs(da), std::abs(db));
    double best = before;
    std::size_t best_j = n;
    for (std::size_t j = 0; j < n; ++j) {
      const double delta = matrix(a, j) - matrix(b, j);
      const double after = std::max(std::abs(da - delta), std::abs(db + delta));
      if (after < best) {
        best = after;
        best_j = j;
      }
    }
    if (best_j == n || best > before * (1.0 - 1e-12)) break;
    const double delta = matrix(a, best_j) - matrix(b, best_j);
    matrix.swap_entries(best_j, a, b);
    sums[a] -= delta;
    sums[b] += delta;
  }
  const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
  return *hi - *lo;
}

double correct_within_cells(QuantileMatrix& matrix, const CellLists& cells, double target) {
  const std::size_t m = matrix.rows(), n = matrix.cols();
  if (cells.size() != n) throw DomainError("correct_within_cells: one cell list per column required");
  double worst = 0.0;
  std::vector<double> slack(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (int pass = 0; pass < 3; ++pass) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += matrix(i, j);
      const double delta = target - sum;
      if (delta == 0.0) break;
      double total = 0.0;
      int unbounded = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const auto [lo, hi] = cells[j][matrix.origin(i, j)];
        slack[j] = delta > 0.0 ? hi - matrix(i, j) : matrix(i, j) - lo;
        slack[j] = std::max(0.0, slack[j]);
        if (std::isinf(slack[j])) ++unbounded;
        total += slack[j];
      }
      if (unbounded > 0) {
        for (std::size_t j = 0; j < n; ++j)
          if (std::isinf(slack[j])) matrix(i, j) += delta / unbounded;
        continue;
      }
      if (total <= 0.0) break;
      const double share = std::min(1.0, std::abs(delta) / total);
      for (std::size_t j = 0; j < n; ++j) {
        const auto [lo, hi] = cells[j][matrix.origin(i, j)];
        const double moved = matrix(i, j) + std::copysign(share * slack[j], delta);
        matrix(i, j) = std::clamp(moved, lo, hi);
      }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += matrix(i, j);
    worst = std::max(worst, std::abs(sum - target));
  }
  return worst;
}

std::vector<double> row_sampler(const QuantileMatrix& matrix, Rng& rng) {
  std::vector<double> r = matrix.row(static_cast<std::size_t>(rng.below(matrix.rows())));
  rng.shuffle(std::span<double>(r));
  return r;
}

}  // namespace mixcenter
