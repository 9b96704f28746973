#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mixcenter/distributions.hpp"
#include "mixcenter/rng.hpp"

namespace mixcenter {

/// m x n matrix whose column j is a permutation of a fixed discretization of
/// marginal j. Stored column-major; origin(i, j) is the index of entry (i, j)
/// in the original column, so per-atom metadata survives rearrangement.
class QuantileMatrix {
 public:
  QuantileMatrix() = default;
  explicit QuantileMatrix(const std::vector<std::vector<double>>& columns);

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[j * m_ + i]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[j * m_ + i]; }
  std::uint32_t origin(std::size_t i, std::size_t j) const { return origin_[j * m_ + i]; }

  std::vector<double> column(std::size_t j) const;
  std::vector<double> row(std::size_t i) const;
  std::vector<double> row_sums() const;
  double spread() const;

  /// Moves the entries of column j so that new row i holds old row perm[i].
  void permute_column(std::size_t j, const std::vector<std::size_t>& perm);
  void swap_entries(std::size_t j, std::size_t a, std::size_t b);

 private:
  std::size_t m_ = 0, n_ = 0;
  std::vector<double> values_;
  std::vector<std::uint32_t> origin_;
};

/// q((j - 1/2) / m), j = 1..m.
std::vector<double> discretize(const Distribution& mu, std::size_t m);

struct RaOptions {
  int max_sweeps = 200;
  double spread_tol = -1.0;  // negative: 2 * (sum of column ranges) / m
  std::uint64_t seed = kDefaultSeed;
  bool shuffle_initial = true;
};

struct RaResult {
  QuantileMatrix matrix;
  double spread = 0.0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> spread_history;  // best spread after each sweep
};

double default_spread_tol(const QuantileMatrix& matrix);

/// Rearrangement algorithm: each column in turn is ordered antitonically to
/// the sum of the others. Returns the best matrix seen.
RaResult ra_flatten(QuantileMatrix matrix, const RaOptions& opt = {});

/// Pairwise swap polish: repeatedly exchanges one entry between the rows with
/// the largest and smallest sums when that lowers both deviations from the
/// mean row sum. Returns the final spread.
double balance_rows(QuantileMatrix& matrix, int max_steps = 100000);

using CellLists = std::vector<std::vector<std::pair<double, double>>>;

/// Moves each entry inside its own cell [lo, hi] (indexed by origin) so that
/// every row sums to target. Unbounded cells absorb any deviation. Returns the
/// largest remaining |row sum - target|, nonzero only where a row lacks slack.
double correct_within_cells(QuantileMatrix& matrix, const CellLists& cells, double target);

/// Uniformly random row with a uniformly random column permutation.
std::vector<double> row_sampler(const QuantileMatrix& matrix, Rng& rng);

}  // namespace mixcenter
