#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mixcenter/center_bounds.hpp"
#include "mixcenter/errors.hpp"

using namespace mixcenter;
using doctest::Approx;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("cauchy center interval") {
  for (int n = 2; n <= 12; ++n) {
    const CenterInterval ci = cauchy_center_interval(n);
    CHECK(ci.hi == std::log(n - 1.0) / kPi);
    CHECK(ci.lo == -ci.hi);
    CHECK(ci.kind == CenterInterval::Kind::exact_formula);
  }
  CHECK(cauchy_center_interval(2).hi == 0.0);
  CHECK(cauchy_center_interval(3).hi == Approx(0.2206356).epsilon(1e-7));
  CHECK_THROWS_AS(cauchy_center_interval(1), DomainError);
}

TEST_CASE("closed-form R against 30-digit values") {
  CHECK(cauchy_R_closed_form(3, 0.1) == Approx(0.29237462902028902923).epsilon(1e-14));
  CHECK(cauchy_R_closed_form(5, 0.05) == Approx(0.56180612465103467206).epsilon(1e-14));
  CHECK(cauchy_R_closed_form(3, 0.3) == Approx(0.51487759049185754472).epsilon(1e-13));
  CHECK(cauchy_R_closed_form(10, 0.09999) == Approx(3.0763683432731050540).epsilon(1e-10));
  CHECK(cauchy_R_closed_form(3, 1e-12) == Approx(0.22063560015331350020).epsilon(1e-14));
  CHECK(cauchy_R_closed_form(2, 0.2) == 0.0);
  CHECK_THROWS_AS(cauchy_R_closed_form(3, 0.4), DomainError);
}

TEST_CASE("closed form agrees with quadrature") {
  for (int n : {3, 4, 7, 15})
    for (double frac : {0.01, 0.2, 0.5, 0.9, 0.999}) {
      const double a = frac / n;
      CHECK(cauchy_R_closed_form(n, a) == Approx(avg_quantile(Cauchy(), (n - 1) * a, 1 - a)).epsilon(1e-10));
    }
}

TEST_CASE("cm bounds of the cauchy approach the exact interval") {
  for (int n : {3, 5, 10}) {
    const CmBounds b = cm_bounds(Cauchy(), n);
    const double hi = cauchy_center_interval(n).hi;
    CHECK(std::abs(b.b_star - hi) <= 1e-4);
    CHECK(std::abs(b.a_star + hi) <= 1e-4);
    // Necessary bounds can only be looser than the exact interval.
    CHECK(b.b_star >= hi - 1e-12);
    CHECK(b.grid_resolution > 1.0);
  }
}

TEST_CASE("cm bounds of point masses and infinite means") {
  const FiniteDiscrete p = FiniteDiscrete::point(1.5);
  const CmBounds b = cm_bounds(p, 4);
  CHECK(b.a_star == Approx(1.5));
  CHECK(b.b_star == Approx(1.5));
  const CmBounds inf = cm_bounds(Pareto(0.5), 3);
  CHECK(std::isinf(inf.a_star));
  CHECK(inf.a_star > 0);
}

TEST_CASE("jm bounds contain the center of a known joint mix") {
  // (delta_0 + 2 delta_1)/3 three times has sum center exactly 2.
  const auto f = std::make_shared<FiniteDiscrete>(std::vector<Atom>{{0.0, 1.0 / 3}, {1.0, 2.0 / 3}});
  JmBoundsInput in{{f, f, f}, {0.01, 0.01, 0.01}};
  const JmBounds b = jm_center_bounds(in);
  CHECK(b.lower <= 2.0 + 1e-12);
  CHECK(b.upper >= 2.0 - 1e-12);
  in.betas = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(jm_center_bounds(in), DomainError);
}

TEST_CASE("dual bound against an independent minimization") {
  // D(c) from the closed antiderivative of the survival function, minimized
  // over log(c - t) with a fine grid plus Brent refinement.
  CHECK(dual_bound(Cauchy(), 3, 0.3).value == Approx(0.98799981666516).epsilon(1e-9));
  CHECK(dual_bound(Cauchy(), 3, 0.5).value == Approx(0.90493421398557).epsilon(1e-9));
  CHECK(dual_bound(Cauchy(), 5, 1.0).value == Approx(0.81780887200070).epsilon(1e-9));
  CHECK(dual_bound(Cauchy(), 3, 0.3).t_argmin == Approx(0.3 - 3.1012409).epsilon(1e-4));
  for (double c : {-0.2, 0.0, 0.1, 0.22}) CHECK(dual_bound(Cauchy(), 3, c).value >= 1.0 - 1e-6);
}

TEST_CASE("mean inequality") {
  CHECK(mean_inequality_check(0.1, 0.0, 1.0, 0.5, 3));
  CHECK(!mean_inequality_check(0.9, 0.0, 1.0, 0.5, 3));
  CHECK_THROWS_AS(mean_inequality_check(0.1, 1.0, 1.0, 0.5, 3), DomainError);
}

TEST_CASE("infinite mean classifier") {
  const auto pareto = std::make_shared<Pareto>(0.8);
  const auto zero = std::make_shared<FiniteDiscrete>(FiniteDiscrete::point(0.0));
  CHECK(infinite_mean_classifier({pareto, zero}) == MeanVerdict::excluded);
  CHECK(infinite_mean_classifier({zero, zero}) == MeanVerdict::inconclusive);
  CHECK(infinite_mean_classifier({pareto, std::make_shared<Cauchy>()}) == MeanVerdict::inconclusive);
  CHECK(infinite_mean_classifier({pareto, std::make_shared<Reflected>(pareto)}) == MeanVerdict::inconclusive);
  CHECK(to_string(MeanVerdict::excluded) == "excluded");
}
