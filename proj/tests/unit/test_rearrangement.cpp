#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mixcenter/errors.hpp"
#include "mixcenter/rearrangement.hpp"
#include "mixcenter/verify.hpp"

using namespace mixcenter;
using doctest::Approx;

namespace {

QuantileMatrix uniform_matrix(std::size_t m, std::size_t n = 3) {
  const auto col = discretize(Uniform(0.0, 1.0), m);
  return QuantileMatrix(std::vector<std::vector<double>>(n, col));
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("discretize uses midpoint quantiles") {
  const auto col = discretize(Uniform(0.0, 1.0), 4);
  CHECK(col == std::vector<double>{0.125, 0.375, 0.625, 0.875});
  CHECK_THROWS_AS(discretize(Uniform(0.0, 1.0), 1), DomainError);
}

TEST_CASE("matrix layout and origins follow permutations") {
  QuantileMatrix q({{1.0, 2.0, 3.0}, {10.0, 20.0, 30.0}});
  CHECK(q.rows() == 3);
  CHECK(q.cols() == 2);
  CHECK(q.row(1) == std::vector<double>{2.0, 20.0});
  q.permute_column(1, {2, 0, 1});
  CHECK(q.column(1) == std::vector<double>{30.0, 10.0, 20.0});
  CHECK(q.origin(0, 1) == 2);
  CHECK(q.row_sums() == std::vector<double>{31.0, 12.0, 23.0});
  CHECK(q.spread() == 19.0);
  CHECK_THROWS_AS(QuantileMatrix({{1.0}, {1.0, 2.0}}), DomainError);
}

TEST_CASE("RA flattens three uniform columns and keeps column multisets") {
  const QuantileMatrix original = uniform_matrix(256);
  RaOptions opt;
  opt.seed = 17;
  const RaResult r = ra_flatten(original, opt);
  CHECK(r.spread <= 0.05);
  CHECK(r.spread == Approx(r.matrix.spread()));
  for (std::size_t j = 0; j < 3; ++j) CHECK(sorted(r.matrix.column(j)) == sorted(original.column(j)));
  for (std::size_t k = 1; k < r.spread_history.size(); ++k) CHECK(r.spread_history[k] <= r.spread_history[k - 1]);
  const VerificationReport rep = run_invariant_suite(r, original);
  CHECK(rep.all_passed());
}

TEST_CASE("spread decreases with the grid size") {
  double last = 1e300;
  for (std::size_t m : {64u, 256u, 1024u}) {
    RaOptions opt;
    opt.seed = substream_seed(kDefaultSeed, "unit_ra", m);
    const double s = ra_flatten(uniform_matrix(m), opt).spread;
    CHECK(s < last);
    last = s;
  }
}

TEST_CASE("RA is deterministic for a seed") {
  RaOptions opt;
  opt.seed = 99;
  const RaResult a = ra_flatten(uniform_matrix(128), opt);
  const RaResult b = ra_flatten(uniform_matrix(128), opt);
  CHECK(a.matrix.row_sums() == b.matrix.row_sums());
  CHECK(a.sweeps == b.sweeps);
}

TEST_CASE("row balancing never increases the spread") {
  RaOptions opt;
  opt.max_sweeps = 2;
  RaResult r = ra_flatten(uniform_matrix(64), opt);
  const double before = r.matrix.spread();
  CHECK(balance_rows(r.matrix) <= before);
}

TEST_CASE("cell correction reaches the target exactly when slack allows") {
  QuantileMatrix q({{0.1, 0.4}, {0.45, 0.05}});
  // Cells around each entry, wide enough to absorb the deviation.
  const CellLists cells{{{0.0, 0.25}, {0.25, 0.5}}, {{0.25, 0.5}, {0.0, 0.25}}};
  const double resid = correct_within_cells(q, cells, 0.5);
  CHECK(resid == Approx(0.0).scale(1).epsilon(1e-15));
  for (double s : q.row_sums()) CHECK(s == Approx(0.5).epsilon(1e-15));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const auto [lo, hi] = cells[j][q.origin(i, j)];
      CHECK(q(i, j) >= lo);
      CHECK(q(i, j) <= hi);
    }
}

TEST_CASE("row sampler returns a permuted row") {
  const QuantileMatrix q({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    const auto r = sorted(row_sampler(q, rng));
    CHECK((r == std::vector<double>{1.0, 3.0, 5.0} || r == std::vector<double>{2.0, 4.0, 6.0}));
  }
}
