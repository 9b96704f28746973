#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mixcenter/discrete_mix.hpp"
#include "mixcenter/errors.hpp"

using namespace mixcenter;
using doctest::Approx;

namespace {

// n = 2 oracle by vertex enumeration. A coupling on {x + y = C} is a
// nonnegative solution w of A w = b over the on-line cells, where A stacks the
// two marginal constraints. If one exists, a basic one exists, so it suffices
// to try every subset of on-line cells with independent columns and solve the
// square normal equations on it.
bool pair_feasible_by_vertices(const FiniteDiscrete& a, const FiniteDiscrete& b, double C) {
  const std::size_t na = a.atoms().size(), nb = b.atoms().size(), rows = na + nb;
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      if (a.atoms()[i].value + b.atoms()[j].value == C) cells.emplace_back(i, j);
  std::vector<double> rhs;
  for (const Atom& x : a.atoms()) rhs.push_back(x.prob);
  for (const Atom& y : b.atoms()) rhs.push_back(y.prob);

  for (std::size_t mask = 1; mask < (std::size_t{1} << cells.size()); ++mask) {
    std::vector<std::vector<double>> cols;
    for (std::size_t k = 0; k < cells.size(); ++k)
      if (mask >> k & 1) {
        std::vector<double> col(rows, 0.0);
        col[cells[k].first] = 1.0;
        col[na + cells[k].second] = 1.0;
        cols.push_back(col);
      }
    const std::size_t m = cols.size();
    // Normal equations G w = A^T b, Gaussian elimination with partial pivoting.
    std::vector<std::vector<double>> g(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = 0; q < m; ++q)
        for (std::size_t r = 0; r < rows; ++r) g[p][q] += cols[p][r] * cols[q][r];
      for (std::size_t r = 0; r < rows; ++r) g[p][m] += cols[p][r] * rhs[r];
    }
    bool singular = false;
    for (std::size_t p = 0; p < m && !singular; ++p) {
      std::size_t piv = p;
      for (std::size_t q = p + 1; q < m; ++q)
        if (std::abs(g[q][p]) > std::abs(g[piv][p])) piv = q;
      if (std::abs(g[piv][p]) < 1e-12) singular = true;
      else {
        std::swap(g[p], g[piv]);
        for (std::size_t q = 0; q < m; ++q)
          if (q != p) {
            const double f = g[q][p] / g[p][p];
            for (std::size_t r = p; r <= m; ++r) g[q][r] -= f * g[p][r];
          }
      }
    }
    if (singular) continue;
    std::vector<double> w(m);
    bool nonnegative = true;
    for (std::size_t p = 0; p < m; ++p) {
      w[p] = g[p][m] / g[p][p];
      nonnegative = nonnegative && w[p] >= -1e-12;
    }
    double resid = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      double v = -rhs[r];
      for (std::size_t p = 0; p < m; ++p) v += cols[p][r] * w[p];
      resid = std::max(resid, std::abs(v));
    }
    if (nonnegative && resid <= 1e-12) return true;
  }
  return false;
}

FiniteDiscrete dyadic(Rng& rng, int size) {
  std::vector<double> values;
  while (static_cast<int>(values.size()) < size) {
    const double v = static_cast<double>(rng.below(6));
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
  }
  std::vector<int> units(size, 1);
  for (int extra = 8 - size; extra > 0; --extra) ++units[rng.below(size)];
  std::vector<Atom> atoms;
  for (int i = 0; i < size; ++i) atoms.push_back({values[i], units[i] / 8.0});
  return FiniteDiscrete(atoms);
}

const FiniteDiscrete kFamily({{0.0, 1.0 / 3.0}, {1.0, 2.0 / 3.0}});
const FiniteDiscrete kBernoulli({{0.0, 0.7}, {1.0, 0.3}});

}  // namespace

TEST_CASE("LP agrees with vertex enumeration on random pairs") {
  Rng rng = substream(kDefaultSeed, "unit_lp_pairs");
  int feasible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteDiscrete a = dyadic(rng, 1 + static_cast<int>(rng.below(4)));
    const double C = static_cast<double>(rng.below(11));
    FiniteDiscrete b = dyadic(rng, 1 + static_cast<int>(rng.below(4)));
    if (trial % 2 == 0) {
      std::vector<Atom> mirrored;
      for (const Atom& x : a.atoms()) mirrored.push_back({C - x.value, x.prob});
      b = FiniteDiscrete(mirrored);
    }
    const bool want = pair_feasible_by_vertices(a, b, C);
    feasible += want;
    CAPTURE(trial);
    CHECK((lp_feasible_center({a, b}, C).verdict == LpVerdict::feasible) == want);
    LpOptions exact;
    exact.arithmetic = LpArithmetic::exact;
    CHECK((lp_feasible_center({a, b}, C, exact).verdict == LpVerdict::feasible) == want);
  }
  CHECK(feasible >= 25);
}

TEST_CASE("two-point family has the single center 2") {
  const std::vector<FiniteDiscrete> ms(3, kFamily);
  for (double C : {0.0, 1.0, 3.0}) CHECK(lp_feasible_center(ms, C).verdict == LpVerdict::infeasible);
  const FeasibilityResult r = lp_feasible_center(ms, 2.0);
  REQUIRE(r.verdict == LpVerdict::feasible);
  REQUIRE(r.coupling);
  const CouplingCheck chk = check_coupling(*r.coupling, ms, 2.0, 1e-9);
  CHECK(chk.ok);
  CHECK(chk.max_marginal_residual <= 1e-10);

  LpOptions exact;
  exact.arithmetic = LpArithmetic::exact;
  const FeasibilityResult e = lp_feasible_center(ms, 2.0, exact);
  CHECK(e.verdict == LpVerdict::feasible);
  CHECK(e.exact);
  CHECK(e.phase1_objective == 0.0);

  const CenterSet cs = enumerate_centers(ms);
  REQUIRE(cs.centers.size() == 1);
  CHECK(cs.centers[0] == 2.0);
  CHECK(cs.candidates_total == 4);
}

TEST_CASE("bernoulli pair is infeasible everywhere with a valid certificate") {
  const std::vector<FiniteDiscrete> ms{kBernoulli, kBernoulli};
  for (double C : {0.0, 1.0, 2.0}) {
    const FeasibilityResult r = lp_feasible_center(ms, C);
    CHECK(r.verdict == LpVerdict::infeasible);
    CHECK(!r.coupling);
    REQUIRE(r.farkas.size() == 2);
    CHECK(r.farkas_gap > 0.0);
    // y . A_j <= 0 on every on-line column (x1, x2) with x1 + x2 = C.
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const double x1 = kBernoulli.atoms()[i].value, x2 = kBernoulli.atoms()[j].value;
        if (x1 + x2 == C) CHECK(r.farkas[0][i] + r.farkas[1][j] <= 1e-9);
      }
  }
  CHECK(enumerate_centers(ms).centers.empty());
}

TEST_CASE("size guards") {
  std::vector<Atom> many;
  for (int i = 0; i < 40; ++i) many.push_back({static_cast<double>(i), 1.0 / 40});
  const FiniteDiscrete wide(many);
  LpOptions opt;
  opt.max_variables = 100;
  CHECK_THROWS_AS(lp_feasible_center({wide, wide, wide}, 60.0, opt), SizeError);
  opt = {};
  opt.arithmetic = LpArithmetic::exact;
  opt.max_exact_variables = 10;
  CHECK_THROWS_AS(lp_feasible_center({wide, wide, wide}, 60.0, opt), SizeError);
}

TEST_CASE("coupling json round trip and canonical form") {
  Coupling c;
  c.n = 2;
  c.support = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}};
  c.weights = {0.25, 0.5, 0.25};
  const Coupling k = c.canonical();
  CHECK(k.size() == 2);
  CHECK(k.support[0] == std::vector<double>{0.0, 1.0});
  CHECK(k.weights[1] == 0.5);
  const Coupling back = Coupling::from_json(k.to_json());
  CHECK(back.support == k.support);
  CHECK(back.weights == k.weights);
  CHECK(k.marginal(0).size() == 2);
}

TEST_CASE("exchangeable permutation keeps sums and equalizes marginals") {
  const Ex01Couplings ex = ex01_couplings(6);
  const Coupling sym = exchangeable_permute(ex.mix_x);
  for (const auto& row : sym.support) CHECK(row[0] + row[1] + row[2] == 0.0);
  const auto m0 = sym.marginal(0), m2 = sym.marginal(2);
  REQUIRE(m0.size() == m2.size());
  for (std::size_t i = 0; i < m0.size(); ++i) {
    CHECK(m0[i].value == m2[i].value);
    CHECK(m0[i].prob == Approx(m2[i].prob).epsilon(1e-15));
  }
  Rng rng(2);
  const Coupling shuffled = exchangeable_permute(ex.mix_y, rng);
  for (const auto& row : shuffled.support) CHECK(row[0] + row[1] + row[2] == 1.0);
  Coupling wide;
  wide.n = 9;
  wide.support = {std::vector<double>(9, 0.0)};
  wide.weights = {1.0};
  CHECK_THROWS_AS(exchangeable_permute(wide), SizeError);
}

TEST_CASE("ex01 couplings are exact") {
  const Ex01Couplings ex = ex01_couplings(20);
  CHECK(ex.mix_x.tail_mass == std::ldexp(1.0, -21));
  double wx = 0.0, wy = 0.0;
  for (double w : ex.mix_x.weights) wx += w;
  for (double w : ex.mix_y.weights) wy += w;
  CHECK(wx == 1.0);
  CHECK(wy == 1.0);
  for (const auto& r : ex.mix_x.support) CHECK(r[0] + r[1] + r[2] == 0.0);
  for (const auto& r : ex.mix_y.support) CHECK(r[0] + r[1] + r[2] == 1.0);
  CHECK_THROWS_AS(ex01_couplings(0), DomainError);
}

TEST_CASE("sum 2 is excluded for the symmetrized ex01 law") {
  const SumTwoExclusion c = sum_two_exclusion(20);
  CHECK(c.a_star >= -1e-9);
  CHECK(c.b_star <= 2.0 / 3.0 + 1e-5);
  CHECK(c.integer_sums == std::vector<long long>{0, 1, 2});
  CHECK(!c.pair_sums_to_one);
  CHECK(c.p_x1_not_one < 1.0L);
  CHECK(c.excludes_two);
}

TEST_CASE("discrete bounds contain every center") {
  const std::vector<FiniteDiscrete> ms(3, kFamily);
  const auto [lo, hi] = discrete_center_bounds(ms);
  CHECK(lo <= 2.0);
  CHECK(hi >= 2.0);
  CHECK(hi - lo < 1.0);
}
