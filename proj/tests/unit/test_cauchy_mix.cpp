#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mixcenter/cauchy_mix.hpp"
#include "mixcenter/errors.hpp"
#include "mixcenter/verify.hpp"

using namespace mixcenter;
using doctest::Approx;

namespace {

const double kLog2Pi = std::log(2.0) / std::numbers::pi;

MixerConfig cfg_at(double c, int n = 3) {
  MixerConfig cfg;
  cfg.n = n;
  cfg.c = c;
  return cfg;
}

}  // namespace

TEST_CASE("A(t, y) against 30-digit quadrature") {
  const MixerConfig cfg = cfg_at(0.1);
  const MixGeometry g(cfg);
  CHECK(eval_A(1.0, 0.0, cfg) == Approx(0.115082361651558).epsilon(1e-11));
  CHECK(eval_A(1.0, g.f(1.1), cfg) == Approx(-0.0180630679968288).epsilon(1e-11));
  CHECK(eval_A(0.3, 0.0, cfg) == Approx(0.0315017132679661).epsilon(1e-11));
  // Decreasing in y and unbounded below.
  CHECK(eval_A(1.0, -1e6, cfg) > 1e5);
  CHECK(eval_A(1.0, 0.05, cfg) > eval_A(1.0, 0.06, cfg));
  // A(t, 0) -> log2/pi - c.
  CHECK(eval_A(1e8, 0.0, cfg) == Approx(kLog2Pi - 0.1).epsilon(1e-6));
}

TEST_CASE("h(t) against 30-digit root finding") {
  struct Case {
    double c, t, h;
  };
  for (const Case& k : {Case{0.1, 1.0, 0.0838604575495179}, Case{0.1, 0.3, 0.240800824503799},
                        Case{0.15, 5.0, 0.00251677338908077}, Case{kLog2Pi, 2.0, 0.0119339006102493},
                        Case{0.05, 10.0, 0.00133801728763431}}) {
    const MixerConfig cfg = cfg_at(k.c);
    const HRoot r = solve_h(k.t, cfg);
    CHECK(r.h == Approx(k.h).epsilon(1e-10));
    CHECK(std::abs(r.residual) <= 1e-12);
  }
}

TEST_CASE("m(t) changes sign once") {
  const MixerConfig cfg = cfg_at(0.1);
  int changes = 0;
  double last = eval_m(1e-3, cfg);
  for (double t = 1e-3; t < 1e4; t *= 1.1) {
    const double m = eval_m(t, cfg);
    changes += (m > 0) != (last > 0);
    last = m;
  }
  CHECK(changes == 1);
}

TEST_CASE("components of mu_t") {
  CauchyMixer mx(cfg_at(0.15));
  const MuTComponents q = mx.components_at(1.0);
  CHECK(q.K1 > 0);
  CHECK(q.K2 >= 0);
  CHECK(q.K4 >= 0);
  CHECK(std::abs(q.mean_offset(3)) <= 1e-8);
  const double ex = q.K1 - 2 * q.K2;
  CHECK(q.alpha == Approx(ex / (ex + q.K4)).epsilon(1e-14));
  // Past the switch point the two-point part is active.
  const MuTComponents late = mx.components_at(5.0);
  CHECK(late.K2 == Approx(1.086e-3).epsilon(2e-3));
  CHECK(!mx.k2_switches().empty());
}

TEST_CASE("mixing measure") {
  CauchyMixer mx(cfg_at(0.1));
  const TMeasure& q = mx.t_measure();
  CHECK(std::abs(q.total_mass - 1.0) <= mx.config().tail_eps + 1e-6);
  CHECK(q.cdf.front() <= 1e-6);
  for (std::size_t j = 1; j < q.cdf.size(); ++j) CHECK(q.cdf[j] >= q.cdf[j - 1]);
  CHECK(q.sample_t(0.5) > 0.0);
  CHECK(q.sample_t(0.9) > q.sample_t(0.1));
}

TEST_CASE("rows sum to n c") {
  const MixerConfig cfg = cfg_at(0.15);
  const SamplerPtr s = make_joint_mix(cfg);
  const auto rows = sample_joint_mix(*s, 11, 20000, 2);
  for (const SampleRow& r : rows) {
    double sum = 0.0;
    for (double x : r.x) sum += x;
    CHECK(std::abs(sum - 0.45) <= std::max(r.row_bound, 1e-9 * (1 + std::abs(sum))));
    if (r.branch == 1) CHECK(std::abs(sum - 0.45) <= 1e-9);
  }
}

TEST_CASE("sampling does not depend on the thread count") {
  const SamplerPtr s = make_joint_mix(cfg_at(0.1));
  const auto a = sample_joint_mix(*s, 5, 20000, 1);
  const auto b = sample_joint_mix(*s, 5, 20000, 4);
  REQUIRE(a.size() == b.size());
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].x == b[i].x;
  CHECK(same);
}

TEST_CASE("negative centers reflect the positive construction") {
  const SamplerPtr pos = make_joint_mix(cfg_at(0.1));
  const SamplerPtr neg = make_joint_mix(cfg_at(-0.1));
  CHECK(neg->center() == -0.1);
  Rng r1(3), r2(3);
  for (int i = 0; i < 100; ++i) {
    const SampleRow a = pos->sample_row(r1), b = neg->sample_row(r2);
    for (int j = 0; j < 3; ++j) CHECK(b.x[j] == -a.x[j]);
  }
}

TEST_CASE("center zero") {
  // Even n: antithetic pairs, exact.
  const SamplerPtr even = make_joint_mix(cfg_at(0.0, 4));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const SampleRow r = even->sample_row(rng);
    CHECK(r.x[0] + r.x[1] + r.x[2] + r.x[3] == Approx(0.0).epsilon(1e-12).scale(1));
  }
  // Odd n: midpoint of the +- q_max/2 mixers.
  const SamplerPtr odd = make_joint_mix(cfg_at(0.0, 3));
  CHECK(odd->center() == 0.0);
  CHECK(odd->metadata().dump().find("convex") != std::string::npos);
}

TEST_CASE("convex combination of the extreme mixers") {
  const SamplerPtr a = make_joint_mix(cfg_at(kLog2Pi));
  const SamplerPtr b = make_joint_mix(cfg_at(-kLog2Pi));
  CHECK(convex_interpolate_mixes(a, b, 0.5)->center() == Approx(0.0).scale(1).epsilon(1e-15));
  CHECK(convex_interpolate_mixes(a, b, 0.75)->center() == Approx(0.5 * kLog2Pi));
  CHECK_THROWS_AS(convex_interpolate_mixes(a, b, 1.5), DomainError);
}

TEST_CASE("centers outside the interval are rejected") {
  CHECK_THROWS_AS(make_joint_mix(cfg_at(0.3)), DomainError);
  CHECK_THROWS_AS(make_joint_mix(cfg_at(0.1, 2)), DomainError);
  MixerConfig bad = cfg_at(0.1);
  bad.tail_eps = 0.0;
  CHECK_THROWS_AS(make_joint_mix(bad), DomainError);
  CHECK_THROWS_AS(make_engine(cfg_at(0.1), "ra"), DomainError);
  CHECK_THROWS_AS(make_engine(cfg_at(0.0), "other"), DomainError);
}

TEST_CASE("rearrangement engine at center zero") {
  MixerConfig cfg = cfg_at(0.0);
  cfg.ra_grid_m = 256;
  const SamplerPtr s = make_engine(cfg, "ra");
  const auto rows = sample_joint_mix(*s, 9, 5000);
  const SumStats st = sum_stats(rows, 0.0);
  CHECK(st.within_bounds);
}

TEST_CASE("density admissibility") {
  const Admissibility c = generic_admissibility(Cauchy(), 3);
  CHECK(c.ok);
  CHECK(c.q_max == Approx(kLog2Pi).epsilon(1e-6));
  const Admissibility p = generic_admissibility(*power_density(1.5), 3);
  CHECK(!p.ok);
  CHECK(std::isfinite(p.witness_x));
  // Exponent 2 is the Cauchy shape up to scale.
  CHECK(generic_admissibility(*power_density(2.0), 3).ok);
}
