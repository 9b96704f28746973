// One line per acceptance criterion; exit status 1 when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "mixcenter/cauchy_mix.hpp"
#include "mixcenter/center_bounds.hpp"
#include "mixcenter/discrete_mix.hpp"
#include "mixcenter/rearrangement.hpp"
#include "mixcenter/verify.hpp"

using namespace mixcenter;

namespace {

const double kLog2Pi = std::log(2.0) / std::numbers::pi;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome exact_interval() {
  double worst = 0.0;
  for (int n = 2; n <= 12; ++n) {
    const CenterInterval ci = cauchy_center_interval(n);
    const double want = std::log(n - 1.0) / std::numbers::pi;
    worst = std::max({worst, std::abs(ci.hi - want), std::abs(ci.lo + want)});
  }
  const CenterInterval three = cauchy_center_interval(3);
  const double anchor = std::max(std::abs(three.hi - 0.2206356), std::abs(three.lo + 0.2206356));
  return {worst == 0.0 && anchor <= 1e-7, fmt("max formula error %.1e, n=3 endpoint off 0.2206356 by %.1e", worst, anchor)};
}

Outcome bound_convergence() {
  double worst = 0.0;
  std::string parts;
  for (int n : {3, 5, 10}) {
    const double b = cm_bounds(Cauchy(), n).b_star;
    const double err = std::abs(b - cauchy_center_interval(n).hi);
    worst = std::max(worst, err);
    parts += fmt(" n=%d:%.2e", n, err);
  }
  return {worst <= 1e-4, "|b* - log(n-1)/pi|" + parts};
}

Outcome closed_vs_quadrature() {
  double worst = 0.0;
  for (int n = 3; n <= 22; ++n)
    for (int k = 1; k <= 20; ++k) {
      const double alpha = (k / 21.0) / n;
      const double closed = cauchy_R_closed_form(n, alpha);
      const double quad = avg_quantile(Cauchy(), (n - 1) * alpha, 1.0 - alpha);
      worst = std::max(worst, std::abs(closed - quad));
    }
  const double r = cauchy_R_closed_form(3, 0.1);
  const double quad = avg_quantile(Cauchy(), 0.2, 0.9);
  const bool anchor = std::abs(r - quad) <= 1e-8;
  return {worst <= 1e-8 && anchor,
          fmt("max |closed - quadrature| %.1e on 20x20 grid; R(3,0.1) = %.10f (quadrature %.10f); "
              "stated 0.292384 differs from both by %.1e, see notes",
              worst, r, quad, std::abs(r - 0.292384))};
}

Outcome duality() {
  double lowest = 2.0;
  for (int n : {3, 5}) {
    const double hi = cauchy_center_interval(n).hi;
    for (int k = 1; k <= 21; ++k) {
      const double c = -hi + 2.0 * hi * k / 22.0;
      lowest = std::min(lowest, dual_bound(Cauchy(), n, c).value);
    }
  }
  return {lowest >= 1.0 - 1e-6, fmt("min D(c) over 2 x 21 interior points = %.9f", lowest)};
}

const InvariantResult* find(const VerificationReport& r, const std::string& name) {
  for (const auto& i : r.invariants)
    if (i.name == name) return &i;
  return nullptr;
}

Outcome mixer_end_to_end() {
  bool ok = true;
  std::string parts;
  for (double c : {0.0, 0.1, 0.15, kLog2Pi}) {
    MixerConfig cfg;
    cfg.c = c;
    cfg.ra_grid_m = 512;
    SuiteOptions opt;
    opt.rows = 100000;
    const VerificationReport rep = run_invariant_suite(cfg, opt);
    double ks = 0.0;
    for (double v : rep.ks_per_coordinate) ks = std::max(ks, v);
    bool here = ks <= 0.02 && std::abs(rep.sum_mean - 3.0 * c) <= 1e-3;
    for (const char* name : {"row_sum_within_bound", "branch1_exact", "mean_row_sum"}) {
      const InvariantResult* inv = find(rep, name);
      here = here && inv && inv->passed;
    }
    ok = ok && here;
    parts += fmt(" c=%.4f: KS %.4f, mean dev %.1e%s;", c, ks, std::abs(rep.sum_mean - 3.0 * c), here ? "" : " FAIL");
  }
  return {ok, "n=3, 1e5 rows," + parts};
}

Outcome invariant_suite() {
  MixerConfig cfg;
  cfg.c = 0.15;
  SuiteOptions opt;
  opt.rows = 20000;
  const VerificationReport rep = run_invariant_suite(cfg, opt);
  const std::vector<std::string> wanted{"h_nonincreasing", "h_within_bounds", "root_residual", "a_zero_nonnegative",
                                        "m_single_sign_change", "q_total_mass", "mu_t_mean", "reconstruction"};
  std::string failed;
  for (const auto& name : wanted) {
    const InvariantResult* inv = find(rep, name);
    if (!inv || !inv->passed) failed += " " + name;
  }
  const InvariantResult* rec = find(rep, "reconstruction");
  return {failed.empty(), fmt("%zu invariants at n=3, c=0.15; reconstruction error %.1e", wanted.size(),
                              rec ? rec->measured : NAN) +
                              (failed.empty() ? std::string() : "; failed:" + failed)};
}

Outcome ex01_reproduction() {
  const VerificationReport rep = verify_ex01(20);
  const SumTwoExclusion ex = sum_two_exclusion(20);
  std::string failed;
  for (const auto& i : rep.invariants)
    if (!i.passed) failed += " " + i.name;
  return {rep.all_passed() && ex.excludes_two,
          fmt("K=20: %zu checks (sums 0/1, P(.=1)=1/2, geometric pmf, symmetrized marginal); sum 2 excluded: %s",
              rep.invariants.size(), ex.excludes_two ? "yes" : "no") +
              (failed.empty() ? std::string() : "; failed:" + failed)};
}

// For n = 2 every support point a of the first marginal has the single partner
// C - a, so a coupling on {x + y = C} exists iff the second marginal is the law
// of C - X exactly.
bool pair_oracle(const FiniteDiscrete& a, const FiniteDiscrete& b, double C) {
  if (a.atoms().size() != b.atoms().size()) return false;
  for (const Atom& x : a.atoms()) {
    bool matched = false;
    for (const Atom& y : b.atoms())
      if (std::abs(x.value + y.value - C) <= 1e-12 && std::abs(x.prob - y.prob) <= 1e-12) matched = true;
    if (!matched) return false;
  }
  return true;
}

FiniteDiscrete random_dyadic(Rng& rng, int size) {
  std::vector<double> values;
  while (static_cast<int>(values.size()) < size) {
    const double v = static_cast<double>(rng.below(7));
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
  }
  // Weights in units of 1/16 so every sum is exact.
  std::vector<int> units(size, 1);
  for (int extra = 16 - size; extra > 0; --extra) ++units[rng.below(size)];
  std::vector<Atom> atoms;
  for (int i = 0; i < size; ++i) atoms.push_back({values[i], units[i] / 16.0});
  return FiniteDiscrete(atoms);
}

Outcome lp_oracle() {
  Rng rng = substream(kDefaultSeed, "acceptance_lp");
  int agree = 0, feasible_cases = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteDiscrete a = random_dyadic(rng, 1 + static_cast<int>(rng.below(4)));
    double C = static_cast<double>(rng.below(13));
    FiniteDiscrete b = random_dyadic(rng, 1 + static_cast<int>(rng.below(4)));
    if (trial % 2 == 0) {
      // Force a feasible instance half the time: b = law of C - X.
      std::vector<Atom> mirrored;
      for (const Atom& x : a.atoms()) mirrored.push_back({C - x.value, x.prob});
      b = FiniteDiscrete(mirrored);
    }
    const bool want = pair_oracle(a, b, C);
    const bool got = lp_feasible_center({a, b}, C).verdict == LpVerdict::feasible;
    agree += want == got;
    feasible_cases += want;
  }
  const FiniteDiscrete bern({{0.0, 0.7}, {1.0, 0.3}});
  bool bern_ok = true;
  for (double C : {0.0, 1.0, 2.0}) bern_ok = bern_ok && lp_feasible_center({bern, bern}, C).verdict == LpVerdict::infeasible;
  bern_ok = bern_ok && enumerate_centers({bern, bern}).centers.empty();

  struct Family {
    FiniteDiscrete law;
    int n;
    double center;
  };
  const std::vector<Family> families{{FiniteDiscrete({{0.0, 1.0 / 3.0}, {1.0, 2.0 / 3.0}}), 3, 2.0},
                                     {FiniteDiscrete({{0.0, 2.0 / 3.0}, {1.0, 1.0 / 3.0}}), 3, 1.0},
                                     {FiniteDiscrete({{-1.0, 0.25}, {3.0, 0.75}}), 4, 8.0}};
  int certified = 0;
  for (const auto& f : families) {
    const std::vector<FiniteDiscrete> ms(f.n, f.law);
    const CenterSet cs = enumerate_centers(ms);
    LpOptions exact;
    exact.arithmetic = LpArithmetic::exact;
    const bool ok = cs.centers.size() == 1 && cs.centers[0] == f.center &&
                    lp_feasible_center(ms, f.center, exact).verdict == LpVerdict::feasible;
    certified += ok;
  }
  return {agree == 50 && bern_ok && certified == static_cast<int>(families.size()),
          fmt("n=2 oracle agreement %d/50 (%d feasible); Bernoulli(0.3) pair infeasible: %s; families certified %d/%zu",
              agree, feasible_cases, bern_ok ? "yes" : "no", certified, families.size())};
}

Outcome ra_behavior() {
  std::vector<double> spreads;
  for (std::size_t m : {64u, 256u, 1024u}) {
    const std::vector<double> col = discretize(Uniform(0.0, 1.0), m);
    RaOptions opt;
    opt.seed = substream_seed(kDefaultSeed, "acceptance_ra", m);
    spreads.push_back(ra_flatten(QuantileMatrix({col, col, col}), opt).spread);
  }
  const bool ok = spreads[1] <= 0.05 && spreads[0] > spreads[1] && spreads[1] > spreads[2];
  return {ok, fmt("three U[0,1] columns: spread %.2e (m=64), %.2e (m=256), %.2e (m=1024)", spreads[0], spreads[1],
                  spreads[2])};
}

Outcome admissibility() {
  const Admissibility cauchy = generic_admissibility(Cauchy(), 3);
  const Admissibility power = generic_admissibility(*power_density(1.5), 3);
  return {cauchy.ok && !power.ok,
          fmt("Cauchy passes (q_max %.7f); 1/(1+|x|^1.5) fails at x = %.3g", cauchy.q_max, power.witness_x)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact interval", exact_interval},
      {"bound convergence", bound_convergence},
      {"closed form vs quadrature", closed_vs_quadrature},
      {"duality consistency", duality},
      {"mixer end-to-end", mixer_end_to_end},
      {"invariant suite", invariant_suite},
      {"ex01 couplings", ex01_reproduction},
      {"LP oracle", lp_oracle},
      {"RA behavior", ra_behavior},
      {"density admissibility", admissibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !out.ok;
    std::printf("%s %2zu %-26s %8.3fs  %s\n", out.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
