#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mixcenter/distributions.hpp"
#include "mixcenter/errors.hpp"

using namespace mixcenter;
using doctest::Approx;

TEST_CASE("cauchy quantile and cdf invert each other") {
  const Cauchy c;
  for (double t : {1e-12, 1e-6, 0.01, 0.25, 0.5, 0.75, 0.99, 1 - 1e-9}) CHECK(c.cdf(c.quantile(t)) == Approx(t).epsilon(1e-12));
  CHECK(c.quantile(0.5) == 0.0);
  CHECK(c.quantile(0.75) == Approx(1.0).epsilon(1e-15));
  // Far tail: q(t) ~ -1 / (pi t).
  CHECK(cauchy_quantile(1e-12) == Approx(-1.0 / (std::numbers::pi * 1e-12)).epsilon(1e-10));
  CHECK(c.survival(1e8) == Approx(1.0 / (std::numbers::pi * 1e8)).epsilon(1e-8));
}

TEST_CASE("cauchy inverse density") {
  const Cauchy c;
  for (double x : {0.0, 0.3, 2.0, 1e3}) CHECK(c.inverse_density(c.density(x)) == Approx(x).epsilon(1e-9));
  CHECK(std::isinf(c.inverse_density(0.0)));
  CHECK_THROWS_AS(c.inverse_density(1.0), DomainError);
}

TEST_CASE("average quantile of the cauchy against high-precision values") {
  const Cauchy c;
  // log(sin(pi a) / sin(pi b)) / (pi (b - a)), evaluated at 30 digits.
  CHECK(avg_quantile(c, 0.2, 0.9) == Approx(0.292374629020289163).epsilon(1e-12));
  CHECK(avg_quantile(c, 0.05, 0.5) == Approx(-1.31222763242609290).epsilon(1e-12));
  CHECK_THROWS_AS(avg_quantile(c, 0.5, 0.5), DomainError);
}

TEST_CASE("finite discrete laws") {
  const FiniteDiscrete f({{1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
  REQUIRE(f.atoms().size() == 2);
  CHECK(f.atoms()[1].prob == 0.5);
  // Left-continuous inverse.
  CHECK(f.quantile(0.5) == 0.0);
  CHECK(f.quantile(0.5000001) == 1.0);
  CHECK(f.cdf_left(1.0) == 0.5);
  CHECK(f.mean() == 0.5);
  CHECK(avg_quantile(f, 0.25, 0.75) == Approx(0.5));
  CHECK_THROWS_AS(FiniteDiscrete({{0.0, 0.5}, {1.0, 0.4}}), DomainError);
  CHECK_THROWS_AS(FiniteDiscrete({{0.0, -0.1}, {1.0, 1.1}}), DomainError);
}

TEST_CASE("ex01 laws have exact truncated pmfs") {
  const CountableDiscreteEx01 nu(CountableDiscreteEx01::Kind::nu, 20);
  const auto table = nu.pmf_table();
  REQUIRE(table.size() == 21);
  CHECK(table[0].value == 1.0);
  CHECK(table[0].prob == 0.5);
  for (int k = 1; k <= 20; ++k) {
    CHECK(table[k].value == std::ldexp(1.0, k));
    CHECK(table[k].prob == std::ldexp(1.0, -(k + 1)));
  }
  CHECK(nu.truncated_mass() == 1.0L - std::ldexp(1.0L, -21));
  CHECK(nu.mean_status() == MeanStatus::plus_infinity);

  const CountableDiscreteEx01 gamma(CountableDiscreteEx01::Kind::gamma, 10);
  // P(-2^(k+1)) = 2^-(k+1), k = 0..K.
  for (const Atom& a : gamma.pmf_table()) {
    const int k = static_cast<int>(std::log2(-a.value)) - 1;
    CHECK(a.value == -std::ldexp(1.0, k + 1));
    CHECK(a.prob == std::ldexp(1.0, -(k + 1)));
  }
  CHECK(gamma.pmf_table().size() == 11);
  CHECK(gamma.mean_status() == MeanStatus::minus_infinity);

  Rng rng = substream(kDefaultSeed, "test_nu");
  const auto xs = sample(nu, rng, 10000);
  const double p1 = std::count(xs.begin(), xs.end(), 1.0) / 10000.0;
  CHECK(std::abs(p1 - 0.5) <= 0.02);
}

TEST_CASE("atom plus uniform") {
  const AtomPlusUniform a(-1.0, 3.0, 0.25);
  CHECK(a.cdf(-1.0) == 0.25);
  CHECK(a.cdf_left(-1.0) == 0.0);
  CHECK(a.quantile(0.2) == -1.0);
  CHECK(a.quantile(0.625) == Approx(1.0));
  CHECK(a.mean() == Approx(0.25 * -1.0 + 0.75 * 1.0));
}

TEST_CASE("pareto mean status and partial expectation") {
  CHECK(Pareto(0.5).mean_status() == MeanStatus::plus_infinity);
  const Pareto p(3.0);
  CHECK(p.mean() == Approx(1.5));
  CHECK(p.partial_expectation(1.0, 1e12) == Approx(1.5).epsilon(1e-9));
}

TEST_CASE("power density normalizer") {
  // integral of 1 / (1 + |x|^p) over R is 2 pi / (p sin(pi / p)).
  for (double p : {2.0, 3.0, 4.0}) {
    const auto g = power_density(p);
    CHECK(g->normalizer() == Approx(2 * std::numbers::pi / (p * std::sin(std::numbers::pi / p))).epsilon(1e-8));
    CHECK(g->cdf(0.0) == Approx(0.5).epsilon(1e-12));
    CHECK(g->cdf(g->quantile(0.9)) == Approx(0.9).epsilon(1e-9));
  }
  CHECK_THROWS_AS(power_density(1.0), DomainError);
}

TEST_CASE("json round trip and marginal lists") {
  const json spec = R"({"marginals": [{"kind": "finite", "atoms": [[0, 0.5], {"value": 2, "prob": 0.5}], "repeat": 2},
                                      {"kind": "cauchy"}, {"kind": "ex01_mu", "K": 5}]})"_json;
  const auto ms = marginals_from_json(spec);
  REQUIRE(ms.size() == 4);
  CHECK(ms[0]->kind() == "finite");
  CHECK(ms[1]->quantile(0.5) == 0.0);
  CHECK(ms[3]->is_discrete());
  for (const auto& m : ms) CHECK(distribution_from_json(m->to_json())->to_json() == m->to_json());
  CHECK_THROWS_AS(distribution_from_json(R"({"kind": "nope"})"_json), ParseError);
  CHECK_THROWS_AS(distribution_from_json(R"({"scale": 1})"_json), ParseError);
  CHECK_THROWS_AS(marginals_from_json(json::array()), ParseError);
}

TEST_CASE("reflected and mixture laws") {
  const auto u = std::make_shared<Uniform>(0.0, 1.0);
  const Reflected r(u);
  CHECK(r.cdf(-0.25) == Approx(0.75));
  CHECK(r.quantile(0.25) == Approx(-0.75));
  const Mixture m({0.5, 0.5}, {u, std::make_shared<FiniteDiscrete>(FiniteDiscrete::point(2.0))});
  CHECK(m.has_atoms());
  CHECK(!m.is_discrete());
  CHECK(m.cdf(1.0) == Approx(0.5));
  CHECK(m.mean() == Approx(1.25));
}

TEST_CASE("substreams are deterministic and distinct") {
  CHECK(substream_seed(1, "a") == substream_seed(1, "a"));
  CHECK(substream_seed(1, "a") != substream_seed(1, "b"));
  CHECK(substream_seed(1, "a", 0) != substream_seed(1, "a", 1));
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform_open();
    CHECK((u > 0.0 && u < 1.0));
    CHECK(rng.below(7) < 7);
  }
}
