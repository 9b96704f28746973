#include "mixcenter/center_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixcenter/errors.hpp"
#include "mixcenter/numerics.hpp"

namespace mixcenter {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kAlphaGrid = 64;
constexpr int kDualGrid = 256;

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

// Minimizes f over a log-spaced grid, then refines between the neighbours of
// the best grid point by golden section in log coordinates.
numerics::MinResult grid_then_golden(const std::function<double(double)>& f,
                                     const std::vector<double>& grid, double log_xtol) {
  std::size_t best = 0;
  double best_v = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  const double lo = std::log(grid[best == 0 ? 0 : best - 1]);
  const double hi = std::log(grid[std::min(best + 1, grid.size() - 1)]);
  numerics::MinResult r{grid[best], best_v};
  if (hi > lo) {
    auto g = [&](double u) { return f(std::exp(u)); };
    const numerics::MinResult refined = numerics::golden_min(g, lo, hi, log_xtol);
    if (refined.fx < r.fx) r = {std::exp(refined.x), refined.fx};
  }
  return r;
}

}  // namespace

std::string to_string(CenterInterval::Kind k) {
  return k == CenterInterval::Kind::exact_formula ? "exact_formula" : "numeric_necessary_bound";
}

json CenterInterval::to_json() const {
  return {{"lo", lo}, {"hi", hi}, {"kind", to_string(kind)}, {"n", n}};
}

JmBounds jm_center_bounds(const JmBoundsInput& input) {
  const std::size_t n = input.marginals.size();
  if (n < 2 || input.betas.size() != n) throw DomainError("jm_center_bounds: need n >= 2 marginals and n betas");
  double beta = 0.0;
  for (double b : input.betas) {
    if (!(b > 0.0 && b < 1.0)) throw DomainError("jm_center_bounds: betas must lie in (0, 1)");
    beta += b;
  }
  if (!(beta < 1.0)) throw DomainError("jm_center_bounds: betas must sum to less than 1");
  JmBounds out;
  for (std::size_t i = 0; i < n; ++i) {
    const double bi = input.betas[i];
    out.lower += avg_quantile(*input.marginals[i], bi, 1.0 - beta + bi);
    out.upper += avg_quantile(*input.marginals[i], beta - bi, 1.0 - bi);
  }
  return out;
}

CenterInterval CmBounds::interval(int n) const {
  return {a_star, b_star, CenterInterval::Kind::numeric_necessary_bound, n};
}

CmBounds cm_bounds(const Distribution& mu, int n) {
  if (n < 2) throw DomainError("cm_bounds: n must be at least 2");
  const double nd = n;
  const std::vector<double> grid = log_grid(1e-6, 1.0 / nd - 1e-6, kAlphaGrid);
  CmBounds out;
  out.method = "alpha_grid_golden";
  out.grid_resolution = grid[1] / grid[0];

  const MeanStatus status = mu.mean_status();
  if (status == MeanStatus::plus_infinity) {
    out.a_star = kInf;
    out.method = "declared_mean+alpha_grid_golden";
  } else {
    auto neg_lower = [&](double a) { return -avg_quantile(mu, a, 1.0 - (nd - 1.0) * a); };
    const numerics::MinResult r = grid_then_golden(neg_lower, grid, 1e-10);
    out.a_star = -r.fx;
    out.alpha_a = r.x;
  }
  if (status == MeanStatus::minus_infinity) {
    out.b_star = -kInf;
    out.method = "declared_mean+alpha_grid_golden";
  } else {
    auto upper = [&](double a) { return avg_quantile(mu, (nd - 1.0) * a, 1.0 - a); };
    const numerics::MinResult r = grid_then_golden(upper, grid, 1e-10);
    out.b_star = r.fx;
    out.alpha_b = r.x;
  }
  return out;
}

double cauchy_R_closed_form(int n, double alpha) {
  if (n < 2) throw DomainError("cauchy_R_closed_form: n must be at least 2");
  const double nd = n;
  if (!(alpha > 0.0 && alpha < 1.0 / nd)) throw DomainError("cauchy_R_closed_form: alpha must lie in (0, 1/n)");
  if (n == 2) return 0.0;
  // s = 1/n - alpha; the 0/0 form at s = 0 is expanded to first order.
  const double s = 1.0 / nd - alpha;
  const double base = kPi / nd;
  if (s < 1e-9) {
    const double csc = 1.0 / std::sin(base);
    return 1.0 / std::tan(base) + kPi * csc * csc * (1.0 - (nd - 1.0) * (nd - 1.0)) * s / (2.0 * nd);
  }
  // Away from alpha = 1/n the ratio is at least about 1 + (n-2)/2 and the
  // direct form is well conditioned; the difference form below would lose
  // digits in a cosine evaluated near pi/2.
  if (alpha < 0.5 / nd) return std::log(std::sin(kPi * (nd - 1.0) * alpha) / std::sin(kPi * alpha)) / (kPi * nd * s);
  // sin(pi (n-1) alpha) - sin(pi alpha) without cancellation, then log1p.
  const double diff = 2.0 * std::cos(base + (nd - 2.0) * kPi * s / 2.0) * std::sin(nd * kPi * s / 2.0);
  const double ratio = diff / std::sin(kPi * alpha);
  return std::log1p(ratio) / (kPi * nd * s);
}

CenterInterval cauchy_center_interval(int n) {
  if (n < 2) throw DomainError("cauchy_center_interval: n must be at least 2");
  const double hi = std::log(static_cast<double>(n - 1)) / kPi;
  return {-hi, hi, CenterInterval::Kind::exact_formula, n};
}

bool mean_inequality_check(double alpha, double x, double y, double q, int n) {
  if (!(q > x)) throw DomainError("mean_inequality_check: need q > x");
  if (!(y > x) || q > y) throw DomainError("mean_inequality_check: need x < q <= y");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("mean_inequality_check: alpha must lie in [0, 1]");
  if (n < 2) throw DomainError("mean_inequality_check: n must be at least 2");
  return alpha <= 1.0 - (y - x) / (n * (q - x)) + 1e-12;
}

DualBound dual_bound(const Distribution& mu, int n, double c) {
  if (n < 2) throw DomainError("dual_bound: n must be at least 2");
  const double iqr = mu.quantile(0.75) - mu.quantile(0.25);
  const double scale = iqr > 0.0 ? iqr : 1.0;
  const std::vector<double> grid = log_grid(1e-6 * scale, 50.0 * scale, kDualGrid);
  DualBound out;
  out.grid_resolution = grid[1] / grid[0];
  // d = c - t > 0; the window is [c - d, c + (n-1) d].
  auto ratio = [&](double d) {
    ++out.evaluations;
    return integrated_survival(mu, c - d, c + (n - 1) * d) / d;
  };
  const numerics::MinResult r = grid_then_golden(ratio, grid, 1e-10);
  out.value = r.fx;
  out.t_argmin = c - r.x;
  return out;
}

std::string to_string(MeanVerdict v) { return v == MeanVerdict::excluded ? "excluded" : "inconclusive"; }

MeanVerdict infinite_mean_classifier(const std::vector<DistributionPtr>& marginals) {
  bool plus = false, minus = false;
  for (const auto& m : marginals) {
    switch (m->mean_status()) {
      case MeanStatus::undefined: return MeanVerdict::inconclusive;
      case MeanStatus::plus_infinity: plus = true; break;
      case MeanStatus::minus_infinity: minus = true; break;
      case MeanStatus::finite: break;
    }
  }
  return plus != minus ? MeanVerdict::excluded : MeanVerdict::inconclusive;
}

}  // namespace mixcenter
