#include "mixcenter/cauchy_mix.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <thread>

#include "mixcenter/errors.hpp"
#include "mixcenter/numerics.hpp"

namespace mixcenter {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
// Below this t the closed forms lose too many digits to cancellation.
constexpr double kClosedFormMinT = 0.5;
constexpr double kRhoCap = 1e100;

double rounding_slack(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return 16.0 * kEps * s;
}

double row_total(const std::vector<double>& x) {
  long double s = 0.0L;
  for (double v : x) s += v;
  return static_cast<double>(s);
}

void validate(const MixerConfig& cfg) {
  if (cfg.n < 2) throw DomainError("mixer: n must be at least 2");
  if (cfg.t_grid < 16) throw DomainError("mixer: t_grid must be at least 16");
  if (!(cfg.tail_eps > 0.0 && cfg.tail_eps < 0.5)) throw DomainError("mixer: tail_eps must lie in (0, 0.5)");
  if (cfg.ra_grid_m < 8) throw DomainError("mixer: ra_grid_m must be at least 8");
  if (!(cfg.root_tol > 0.0)) throw DomainError("mixer: root_tol must be positive");
  if (!(cfg.t_min > 0.0)) throw DomainError("mixer: t_min must be positive");
  if (!std::isfinite(cfg.c)) throw DomainError("mixer: c must be finite");
}

bool is_standard_cauchy(const SymmetricUnimodal& d) {
  const auto* p = dynamic_cast<const Cauchy*>(&d);
  return p != nullptr && p->scale() == 1.0;
}

}  // namespace

json MixerConfig::to_json() const {
  return {{"n", n},           {"c", c},         {"t_grid", t_grid}, {"tail_eps", tail_eps},
          {"ra_grid_m", ra_grid_m}, {"root_tol", root_tol}, {"t_min", t_min}, {"seed", seed}};
}

double MuTComponents::mean_offset(int n) const {
  const double num = -t * K1 + (n - 1) * t * K2 + K4 * (width - 2.0 * t) / 2.0;
  return Q > 0.0 ? num / Q : 0.0;
}

// ---------------------------------------------------------------- geometry

MixGeometry::MixGeometry(const MixerConfig& cfg, SymmetricPtr density)
    : cfg_(cfg), density_(density ? std::move(density) : std::make_shared<Cauchy>()) {
  validate(cfg_);
  closed_ = is_standard_cauchy(*density_);
  q_max_ = closed_ ? std::log(static_cast<double>(cfg_.n - 1)) / kPi : density_->center_limit(cfg_.n);
}

double MixGeometry::fdiff(double s, double rho) const {
  const double c = cfg_.c;
  if (!closed_) return f(c + s) - (std::isinf(rho) ? 0.0 : f(c + rho));
  const double x = c + s;
  const double fx = 1.0 / (kPi * (1.0 + x * x));
  if (std::isinf(rho)) return fx;
  const double r = c + rho;
  // f(x) - f(r) = (r - x)(r + x) / (pi (1 + x^2)(1 + r^2))
  return (rho - s) / (1.0 + r * r) * (r + x) * fx;
}

double MixGeometry::integrate_s(const std::function<double(double)>& g, double a, double b) const {
  if (!(b > a)) return 0.0;
  const numerics::QuadOptions opt{0.0, 1e-12, 4000};
  // Split at the mode of f(c + s) and at s = 0, where the factor s changes sign.
  std::vector<double> cuts{a};
  for (double p : {-cfg_.c, 0.0})
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    const numerics::QuadResult r = numerics::integrate(g, cuts[i], cuts[i + 1], opt);
    if (!r.converged && r.abs_error > 1e-10 * std::abs(r.value))
      throw NumericError("mixer quadrature did not converge", r.abs_error);
    total += r.value;
  }
  return total;
}

double MixGeometry::A_rho(double t, double rho) const {
  const double c = cfg_.c;
  const double m = std::min((cfg_.n - 1) * t, rho);
  if (closed_ && t >= kClosedFormMinT) {
    const double h = std::isinf(rho) ? 0.0 : f(c + rho);
    const double lo = c - t, hi = c + m;
    const double pe = std::log1p((hi - lo) * (hi + lo) / (1.0 + lo * lo)) / (2.0 * kPi);
    const double dF = (std::atan(hi) - std::atan(lo)) / kPi;
    return pe - c * dF - h * (m - t) * (m + t) / 2.0;
  }
  return integrate_s([&](double s) { return s * fdiff(s, rho); }, -t, m);
}

double MixGeometry::eval_A(double t, double y) const {
  if (!(t > 0.0)) throw DomainError("eval_A: t must be positive");
  const double c = cfg_.c;
  double r = kInf;
  if (y > 0.0) {
    if (y >= f(0.0)) return 0.0;
    r = closed_ ? cauchy_inverse_density(y) : density_->inverse_density(y);
  }
  const double lo = std::max(c - t, -r), hi = std::min(c + (cfg_.n - 1) * t, r);
  if (!(hi > lo)) return 0.0;
  if (closed_ && t >= kClosedFormMinT) {
    const double pe = std::log1p((hi - lo) * (hi + lo) / (1.0 + lo * lo)) / (2.0 * kPi);
    const double dF = (std::atan(hi) - std::atan(lo)) / kPi;
    return pe - c * dF - y * ((hi - c) * (hi - c) - (lo - c) * (lo - c)) / 2.0;
  }
  return integrate_s([&](double s) { return s * (f(c + s) - y); }, lo - c, hi - c);
}

double MixGeometry::eval_m(double t) const {
  const int n = cfg_.n;
  return (n - 1.0) * (n - 1.0) * f(cfg_.c + (n - 1) * t) - f(cfg_.c - t);
}

HRoot MixGeometry::solve(double t, double rho_hint) const {
  if (!(t > 0.0)) throw DomainError("solve_h: t must be positive");
  auto A = [&](double rho) { return A_rho(t, rho); };
  const double a_zero = A(kInf);
  if (a_zero < -1e-10)
    throw InvariantViolation("A(t, 0) < 0 at t = " + std::to_string(t) +
                             ": c lies outside the admissible interval");
  if (a_zero <= 0.0) return {0.0, kInf, a_zero};

  double a = t, fa = A(t);
  if (fa >= 0.0) return {f(cfg_.c + t), t, fa};
  double b = 0.0, fb = 0.0;
  if (std::isfinite(rho_hint) && rho_hint > t) {
    double lo = std::max(t, rho_hint * (1.0 - 1e-6)), flo = A(lo);
    while (flo > 0.0) {
      lo = t + (lo - t) * 0.25;
      flo = A(lo);
      if (lo - t < 1e-14 * t) {
        lo = t;
        flo = fa;
        break;
      }
    }
    a = lo;
    fa = flo;
    b = std::max(a * (1.0 + 2e-6), rho_hint * (1.0 + 1e-6));
  } else {
    b = 2.0 * t;
  }
  fb = A(b);
  while (fb < 0.0) {
    a = b;
    fa = fb;
    b *= 4.0;
    if (b > kRhoCap) return {0.0, kInf, a_zero};
    fb = A(b);
  }
  const double rho = numerics::brent_root(A, a, b, fa, fb, 0.0, 400);
  const double h = f(cfg_.c + rho);
  return {h, rho, A(rho)};
}

MuTComponents MixGeometry::components(double t, const HRoot& root) const {
  const int n = cfg_.n;
  const double c = cfg_.c;
  const double rho = root.rho;
  const double m = std::min((n - 1) * t, rho);
  MuTComponents k;
  k.t = t;
  k.h = root.h;
  k.K1 = fdiff(-t, rho);
  k.K2 = rho > (n - 1) * t ? (n - 1) * fdiff((n - 1) * t, rho) : 0.0;
  k.K3 = c + m;
  // Implicit differentiation of A(t, h(t)) = 0.
  const double A_t = (n - 1) * t * k.K2 - t * k.K1;
  const double A_y = -(m - t) * (m + t) / 2.0;
  k.dh = -A_t / A_y;
  k.width = m + t;
  k.K4 = -k.dh * k.width;
  double excess = k.K1 - (n - 1) * k.K2;
  if (excess < 0.0 && excess > -1e-12 * k.K1) {
    excess = 0.0;
    k.dh = 0.0;
    k.K4 = 0.0;
  }
  k.Q = k.K1 + k.K2 + k.K4;

  if (!(k.K1 > 0.0)) throw InvariantViolation("K1(t) > 0 fails at t = " + std::to_string(t));
  if (k.K2 < 0.0) throw InvariantViolation("K2(t) >= 0 fails at t = " + std::to_string(t));
  if (k.K4 < 0.0 || excess < 0.0)
    throw InvariantViolation("K1(t) >= (n-1) K2(t) fails at t = " + std::to_string(t));
  if (k.K3 < c + t) throw InvariantViolation("K3(t) >= c + t fails at t = " + std::to_string(t));
  if (k.width > n * t * (1.0 + 1e-12))
    throw InvariantViolation("mean inequality n t >= K3 - (c - t) fails at t = " + std::to_string(t));

  k.p_two_point = n * k.K2 / k.Q;
  k.alpha = excess + k.K4 > 0.0 ? excess / (excess + k.K4) : 0.0;
  return k;
}

double MixGeometry::nu_total(double t, const HRoot& root) const {
  const double m = std::min((cfg_.n - 1) * t, root.rho);
  if (closed_ && t >= kClosedFormMinT) {
    const double c = cfg_.c;
    return (std::atan(c + m) - std::atan(c - t)) / kPi - root.h * (m + t);
  }
  return integrate_s([&](double s) { return fdiff(s, root.rho); }, -t, m);
}

double MixGeometry::nu_below(double t, const HRoot& root, double y) const {
  const double c = cfg_.c;
  const double upper = std::min(std::min((cfg_.n - 1) * t, root.rho), y - c);
  if (!(upper > -t)) return 0.0;
  if (closed_ && t >= kClosedFormMinT)
    return (std::atan(c + upper) - std::atan(c - t)) / kPi - root.h * (upper + t);
  return integrate_s([&](double s) { return fdiff(s, root.rho); }, -t, upper);
}

double MixGeometry::k2_switch(double a, double b) const {
  auto g = [&](double t) { return A_rho(t, (cfg_.n - 1) * t); };
  return numerics::brent_root(g, a, b, g(a), g(b), 0.0, 400);
}

double eval_A(double t, double y, const MixerConfig& cfg) { return MixGeometry(cfg).eval_A(t, y); }
HRoot solve_h(double t, const MixerConfig& cfg) { return MixGeometry(cfg).solve(t); }
double eval_m(double t, const MixerConfig& cfg) { return MixGeometry(cfg).eval_m(t); }

// ---------------------------------------------------------------- HFunction

HFunction::HFunction(std::vector<double> t, std::vector<double> h, std::vector<double> dh)
    : t_(std::move(t)), h_(std::move(h)), d_(std::move(dh)) {
  if (t_.size() < 2 || h_.size() != t_.size() || d_.size() != t_.size())
    throw DomainError("HFunction: need at least two knots with values and slopes");
  // Fritsch-Carlson: zero slopes on flat cells, shrink where the cubic would
  // overshoot.
  for (std::size_t j = 0; j + 1 < t_.size(); ++j) {
    const double secant = (h_[j + 1] - h_[j]) / (t_[j + 1] - t_[j]);
    if (secant == 0.0) {
      d_[j] = d_[j + 1] = 0.0;
      continue;
    }
    double a = d_[j] / secant, b = d_[j + 1] / secant;
    if (a < 0.0) d_[j] = a = 0.0;
    if (b < 0.0) d_[j + 1] = b = 0.0;
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      d_[j] = tau * a * secant;
      d_[j + 1] = tau * b * secant;
    }
  }
}

std::size_t HFunction::cell(double t) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  if (it == t_.begin()) return 0;
  return std::min(static_cast<std::size_t>(it - t_.begin()) - 1, t_.size() - 2);
}

double HFunction::operator()(double t) const {
  const std::size_t j = cell(t);
  const double dt = t_[j + 1] - t_[j];
  const double s = std::clamp((t - t_[j]) / dt, 0.0, 1.0);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * h_[j] + (s3 - 2 * s2 + s) * dt * d_[j] + (-2 * s3 + 3 * s2) * h_[j + 1] +
         (s3 - s2) * dt * d_[j + 1];
}

double HFunction::derivative(double t) const {
  const std::size_t j = cell(t);
  const double dt = t_[j + 1] - t_[j];
  const double s = std::clamp((t - t_[j]) / dt, 0.0, 1.0);
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * h_[j] + (-6 * s2 + 6 * s) * h_[j + 1]) / dt + (3 * s2 - 4 * s + 1) * d_[j] +
         (3 * s2 - 2 * s) * d_[j + 1];
}

MuTComponents k_components(double t, const MixGeometry& geo, const HFunction& hfun) {
  const double h0 = hfun(t);
  double hint = std::numeric_limits<double>::quiet_NaN();
  if (h0 > 0.0 && h0 < geo.f(0.0)) {
    const double r = geo.closed_form() ? cauchy_inverse_density(h0) : geo.density().inverse_density(h0);
    hint = r - geo.config().c;
  }
  return geo.components(t, geo.solve(t, hint));
}

// ---------------------------------------------------------------- TMeasure

double TMeasure::sample_t(double u) const {
  const double target = u * total_mass;
  if (target <= cdf.front()) {
    // Q((0, t]) grows like t^2 near 0.
    return cdf.front() > 0.0 ? t.front() * std::sqrt(target / cdf.front()) : t.front();
  }
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) return t.back();
  const std::size_t j = static_cast<std::size_t>(it - cdf.begin()) - 1;
  const double span = cdf[j + 1] - cdf[j];
  const double frac = span > 0.0 ? (target - cdf[j]) / span : 0.0;
  return t[j] + frac * (t[j + 1] - t[j]);
}

TMeasure build_t_measure(const MixGeometry& geo, const std::vector<KnotRecord>& knots) {
  if (knots.size() < 2) throw DomainError("build_t_measure: need at least two knots");
  TMeasure tm;
  tm.t.reserve(knots.size());
  tm.cdf.reserve(knots.size());
  tm.t.push_back(knots.front().t);
  tm.cdf.push_back(geo.nu_total(knots.front().t, knots.front().root));
  for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
    const KnotRecord& a = knots[j];
    const KnotRecord& b = knots[j + 1];
    const double mid = 0.5 * (a.t + b.t);
    double hint = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(a.root.rho) && std::isfinite(b.root.rho)) hint = 0.5 * (a.root.rho + b.root.rho);
    const MuTComponents km = geo.components(mid, geo.solve(mid, hint));
    // Simpson on each cell; Q is smooth between knots.
    const double mass = (b.t - a.t) / 6.0 * (a.comps.Q + 4.0 * km.Q + b.comps.Q);
    tm.t.push_back(b.t);
    tm.cdf.push_back(tm.cdf.back() + mass);
  }
  tm.total_mass = tm.cdf.back();
  tm.normalization = 1.0 / tm.total_mass;
  tm.t_max = knots.back().t;
  tm.closed_form_mass = geo.nu_total(knots.back().t, knots.back().root);
  return tm;
}

// ---------------------------------------------------------------- CauchyMixer

struct CauchyMixer::TableCache {
  explicit TableCache(std::size_t count) : flags(new std::once_flag[count]), tables(count) {}
  std::unique_ptr<std::once_flag[]> flags;
  std::vector<std::unique_ptr<QuantileMatrix>> tables;
  std::mutex stats_mutex;
  double max_rescale = 0.0;
};

CauchyMixer::CauchyMixer(const MixerConfig& cfg, SymmetricPtr density)
    : cfg_(cfg), geo_(cfg, std::move(density)) {
  if (cfg_.n < 3) throw DomainError("CauchyMixer: n must be at least 3");
  if (!(cfg_.c > 0.0)) throw DomainError("CauchyMixer: c must be positive (use make_joint_mix)");
  const double qm = geo_.q_max();
  if (cfg_.c > qm * (1.0 + 1e-12))
    throw DomainError("c = " + std::to_string(cfg_.c) + " lies outside the admissible interval [-" +
                      std::to_string(qm) + ", " + std::to_string(qm) + "]");

  // Truncation point: smallest power-of-two T with nu_T(R) >= 1 - tail_eps.
  double t_max = 1024.0;
  for (;;) {
    const HRoot r = geo_.solve(t_max);
    if (1.0 - geo_.nu_total(t_max, r) <= cfg_.tail_eps) break;
    t_max *= 2.0;
    if (t_max > 0x1p40) throw NumericError("mixer: Q mass does not reach 1 - tail_eps", t_max);
  }
  if (cfg_.t_min >= t_max) throw DomainError("mixer: t_min must be below the truncation point");

  auto record = [&](double t, double hint) {
    KnotRecord k;
    k.t = t;
    k.root = geo_.solve(t, hint);
    k.A_zero = geo_.A_rho(t, kInf);
    k.m = geo_.eval_m(t);
    k.comps = geo_.components(t, k.root);
    return k;
  };

  const int count = cfg_.t_grid;
  const double la = std::log(cfg_.t_min), lb = std::log(t_max);
  knots_.reserve(static_cast<std::size_t>(count) + 4);
  double hint = std::numeric_limits<double>::quiet_NaN();
  for (int j = 0; j < count; ++j) {
    const double t = j + 1 == count ? t_max : std::exp(la + (lb - la) * j / (count - 1));
    if (!knots_.empty() && std::isfinite(knots_.back().root.rho)) hint = knots_.back().root.rho * t / knots_.back().t;
    KnotRecord k = record(j == 0 ? cfg_.t_min : t, hint);
    if (!knots_.empty()) {
      const KnotRecord& prev = knots_.back();
      const bool was = prev.comps.K2 > 0.0, is = k.comps.K2 > 0.0;
      if (was != is) {
        const double ts = geo_.k2_switch(prev.t, k.t);
        if (ts > prev.t * (1.0 + 1e-9) && ts < k.t * (1.0 - 1e-9)) {
          switches_.push_back(ts);
          knots_.push_back(record(ts, (geo_.config().n - 1) * ts));
        }
      }
    }
    knots_.push_back(std::move(k));
  }

  std::vector<double> ts, hs, ds;
  for (const KnotRecord& k : knots_) {
    ts.push_back(k.t);
    hs.push_back(k.root.h);
    ds.push_back(k.comps.dh);
  }
  hfun_ = HFunction(ts, hs, ds);
  measure_ = build_t_measure(geo_, knots_);
  if (std::abs(measure_.total_mass - 1.0) > cfg_.tail_eps + 1e-3)
    throw NumericError("mixer: integrated Q mass is off by more than tail_eps + 1e-3",
                       std::abs(measure_.total_mass - 1.0));
  tables_ = std::make_shared<TableCache>(static_cast<std::size_t>(cfg_.ra_grid_m) + 1);
}

HRoot CauchyMixer::root_at(double t) const {
  const double h0 = hfun_(t);
  double hint = std::numeric_limits<double>::quiet_NaN();
  if (h0 > 0.0 && h0 < geo_.f(0.0)) {
    const double r = geo_.closed_form() ? cauchy_inverse_density(h0) : geo_.density().inverse_density(h0);
    hint = r - cfg_.c;
  }
  return geo_.solve(t, hint);
}

MuTComponents CauchyMixer::components_at(double t) const { return geo_.components(t, root_at(t)); }

const QuantileMatrix& CauchyMixer::atom_uniform_table(std::size_t k) const {
  const std::size_t m = static_cast<std::size_t>(cfg_.ra_grid_m);
  if (k >= m) throw DomainError("atom_uniform_table: k must be below ra_grid_m");
  TableCache& cache = *tables_;
  std::call_once(cache.flags[k], [&] {
    const std::size_t u = m - k;
    const std::size_t n = static_cast<std::size_t>(cfg_.n);
    std::vector<double> col(m, 0.0);
    std::vector<std::pair<double, double>> cells(m, {0.0, 0.0});
    for (std::size_t i = 0; i < u; ++i) {
      col[k + i] = (static_cast<double>(i) + 0.5) / static_cast<double>(u);
      cells[k + i] = {static_cast<double>(i) / static_cast<double>(u), static_cast<double>(i + 1) / static_cast<double>(u)};
    }
    RaOptions opt;
    opt.seed = substream_seed(cfg_.seed, "ra_table", k);
    RaResult ra = ra_flatten(QuantileMatrix(std::vector<std::vector<double>>(n, col)), opt);
    balance_rows(ra.matrix);
    const double target = static_cast<double>(n) * static_cast<double>(u) / static_cast<double>(m) / 2.0;
    correct_within_cells(ra.matrix, CellLists(n, cells), target);
    // Rows the cells could not fix are rescaled; the atom entries stay at 0.
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ra.matrix(i, j);
      if (s == target) continue;
      if (!(s > 0.0)) throw InvariantViolation("atom_uniform_table: row without uniform entries");
      const double factor = target / s;
      for (std::size_t j = 0; j < n; ++j) ra.matrix(i, j) *= factor;
      worst = std::max(worst, std::abs(factor - 1.0));
    }
    cache.tables[k] = std::make_unique<QuantileMatrix>(std::move(ra.matrix));
    std::lock_guard<std::mutex> lock(cache.stats_mutex);
    cache.max_rescale = std::max(cache.max_rescale, worst);
  });
  return *cache.tables[k];
}

double CauchyMixer::table_rescale() const {
  std::lock_guard<std::mutex> lock(tables_->stats_mutex);
  return tables_->max_rescale;
}

SampleRow CauchyMixer::sample_mu_t(double t, Rng& rng) const {
  const MuTComponents k = components_at(t);
  const int n = cfg_.n;
  const double c = cfg_.c;
  const double base = c - t;
  SampleRow row;
  row.t = t;
  row.x.assign(static_cast<std::size_t>(n), base);
  if (rng.uniform() < k.p_two_point) {
    row.branch = 1;
    row.x[rng.below(static_cast<std::uint64_t>(n))] = c + (n - 1) * t;
    row.row_sum = row_total(row.x);
    row.row_bound = rounding_slack(row.x);
    return row;
  }
  row.branch = 2;
  if (k.K2 > 0.0) {
    // Window reaches c + (n-1) t: atom weight (n-2)/n on c - t and uniform
    // weight 2/n on [c - t, c + (n-1) t]. An antithetic pair is an exact mix.
    const auto i = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
    auto j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;
    const double v = rng.uniform_open();
    row.x[i] = base + k.width * v;
    row.x[j] = base + k.width * (1.0 - v);
  } else {
    const double mm = cfg_.ra_grid_m;
    const auto kk = static_cast<std::size_t>(std::lround(k.alpha * mm));
    const QuantileMatrix& table = atom_uniform_table(kk);
    const std::vector<double> r = row_sampler(table, rng);
    const double scale = 2.0 * t / (1.0 - static_cast<double>(kk) / mm);
    for (std::size_t i = 0; i < r.size(); ++i) row.x[i] = base + scale * r[i];
  }
  row.row_sum = row_total(row.x);
  row.row_bound = n * k.width / cfg_.ra_grid_m + rounding_slack(row.x);
  return row;
}

SampleRow CauchyMixer::sample_row(Rng& rng) const {
  return sample_mu_t(measure_.sample_t(rng.uniform_open()), rng);
}

json CauchyMixer::metadata() const {
  json j = cfg_.to_json();
  j["engine"] = "construction";
  j["mass_deficit"] = mass_deficit();
  j["t_max"] = measure_.t_max;
  j["knots"] = knots_.size();
  j["k2_switches"] = switches_;
  j["closed_form_mass"] = measure_.closed_form_mass;
  j["table_rescale"] = table_rescale();
  return j;
}

// ---------------------------------------------------------------- other engines

SampleRow ReflectedSampler::sample_row(Rng& rng) const {
  SampleRow r = base_->sample_row(rng);
  for (double& v : r.x) v = -v;
  r.row_sum = -r.row_sum;
  return r;
}

json ReflectedSampler::metadata() const {
  json j = base_->metadata();
  j["c"] = center();
  j["reflected"] = true;
  return j;
}

AntitheticSampler::AntitheticSampler(int n) : n_(n) {
  if (n < 2 || n % 2 != 0) throw DomainError("AntitheticSampler: n must be even");
}

SampleRow AntitheticSampler::sample_row(Rng& rng) const {
  SampleRow row;
  row.x.resize(static_cast<std::size_t>(n_));
  for (int p = 0; p < n_ / 2; ++p) {
    const double x = cauchy_quantile(rng.uniform_open());
    row.x[2 * static_cast<std::size_t>(p)] = x;
    row.x[2 * static_cast<std::size_t>(p) + 1] = -x;
  }
  rng.shuffle(std::span<double>(row.x));
  row.row_sum = row_total(row.x);
  row.row_bound = rounding_slack(row.x);
  return row;
}

json AntitheticSampler::metadata() const { return {{"engine", "antithetic"}, {"n", n_}, {"c", 0.0}}; }

ConvexCombination::ConvexCombination(SamplerPtr a, SamplerPtr b, double alpha)
    : a_(std::move(a)), b_(std::move(b)), alpha_(alpha) {
  if (!a_ || !b_ || a_->n() != b_->n()) throw DomainError("convex combination: samplers must share n");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("convex combination: alpha must lie in [0, 1]");
}

double ConvexCombination::center() const { return alpha_ * a_->center() + (1.0 - alpha_) * b_->center(); }

SampleRow ConvexCombination::sample_row(Rng& rng) const {
  if (alpha_ == 1.0) return a_->sample_row(rng);
  if (alpha_ == 0.0) return b_->sample_row(rng);
  const SampleRow ra = a_->sample_row(rng);
  const SampleRow rb = b_->sample_row(rng);
  SampleRow row;
  row.x.resize(ra.x.size());
  for (std::size_t i = 0; i < ra.x.size(); ++i) row.x[i] = alpha_ * ra.x[i] + (1.0 - alpha_) * rb.x[i];
  row.row_sum = row_total(row.x);
  row.row_bound = alpha_ * ra.row_bound + (1.0 - alpha_) * rb.row_bound + rounding_slack(row.x);
  return row;
}

json ConvexCombination::metadata() const {
  return {{"engine", "convex_combination"}, {"alpha", alpha_}, {"n", n()}, {"c", center()},
          {"a", a_->metadata()},            {"b", b_->metadata()}};
}

RaTableSampler::RaTableSampler(int n, int m, std::uint64_t seed) : m_(m) {
  if (n < 2) throw DomainError("RaTableSampler: n must be at least 2");
  if (m < 8 || m % 2 != 0) throw DomainError("RaTableSampler: m must be even and at least 8");
  const auto mm = static_cast<std::size_t>(m);
  std::vector<double> col(mm);
  std::vector<std::pair<double, double>> cells(mm);
  for (std::size_t i = 0; i < mm / 2; ++i) {
    col[i] = cauchy_quantile((static_cast<double>(i) + 0.5) / m);
    col[mm - 1 - i] = -col[i];  // exact antisymmetry, so the column sums to 0
  }
  for (std::size_t i = 0; i < mm; ++i) {
    const double lo = i == 0 ? -kInf : (2 * i <= mm ? cauchy_quantile(static_cast<double>(i) / m)
                                                    : -cauchy_quantile(static_cast<double>(mm - i) / m));
    const double hi = i + 1 == mm ? kInf : (2 * (i + 1) <= mm ? cauchy_quantile(static_cast<double>(i + 1) / m)
                                                              : -cauchy_quantile(static_cast<double>(mm - i - 1) / m));
    cells[i] = {lo, hi};
  }
  RaOptions opt;
  opt.seed = substream_seed(seed, "ra_cauchy", static_cast<std::uint64_t>(n));
  RaResult ra = ra_flatten(QuantileMatrix(std::vector<std::vector<double>>(static_cast<std::size_t>(n), col)), opt);
  balance_rows(ra.matrix);
  residual_ = correct_within_cells(ra.matrix, CellLists(static_cast<std::size_t>(n), cells), 0.0);
  table_ = std::move(ra.matrix);
  const auto sums = table_.row_sums();
  bounds_.resize(mm);
  for (std::size_t i = 0; i < mm; ++i) bounds_[i] = std::abs(sums[i]) + rounding_slack(table_.row(i));
}

SampleRow RaTableSampler::sample_row(Rng& rng) const {
  const auto i = static_cast<std::size_t>(rng.below(table_.rows()));
  SampleRow row;
  row.x = table_.row(i);
  rng.shuffle(std::span<double>(row.x));
  row.row_sum = row_total(row.x);
  row.row_bound = bounds_[i];
  return row;
}

json RaTableSampler::metadata() const {
  return {{"engine", "ra"}, {"n", n()}, {"c", 0.0}, {"ra_grid_m", m_}, {"max_residual", residual_}};
}

SamplerPtr convex_interpolate_mixes(SamplerPtr a, SamplerPtr b, double alpha) {
  return std::make_shared<ConvexCombination>(std::move(a), std::move(b), alpha);
}

SamplerPtr make_joint_mix(const MixerConfig& cfg, SymmetricPtr density) {
  const MixGeometry geo(cfg, density);
  const double qm = geo.q_max();
  if (std::abs(cfg.c) > qm * (1.0 + 1e-12))
    throw DomainError("c = " + std::to_string(cfg.c) + " lies outside the admissible interval [-" +
                      std::to_string(qm) + ", " + std::to_string(qm) + "] for n = " + std::to_string(cfg.n));
  if (cfg.c == 0.0) {
    if (cfg.n % 2 == 0) {
      if (!geo.closed_form()) throw DomainError("antithetic engine supports the standard Cauchy only");
      return std::make_shared<AntitheticSampler>(cfg.n);
    }
    MixerConfig half = cfg;
    half.c = qm / 2.0;
    auto plus = std::make_shared<CauchyMixer>(half, density);
    return convex_interpolate_mixes(plus, std::make_shared<ReflectedSampler>(plus), 0.5);
  }
  if (cfg.c > 0.0) return std::make_shared<CauchyMixer>(cfg, density);
  MixerConfig mirrored = cfg;
  mirrored.c = -cfg.c;
  return std::make_shared<ReflectedSampler>(std::make_shared<CauchyMixer>(mirrored, density));
}

SamplerPtr make_engine(const MixerConfig& cfg, const std::string& engine) {
  if (engine == "construction") return make_joint_mix(cfg);
  if (engine == "ra") {
    if (cfg.c != 0.0) throw DomainError("the ra engine samples center 0 only");
    return std::make_shared<RaTableSampler>(cfg.n, cfg.ra_grid_m, cfg.seed);
  }
  throw DomainError("unknown engine \"" + engine + "\" (expected construction or ra)");
}

std::vector<SampleRow> sample_joint_mix(const JointSampler& sampler, std::uint64_t seed, std::size_t count,
                                        unsigned threads) {
  constexpr std::size_t kChunk = 8192;
  std::vector<SampleRow> rows(count);
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(chunks, 1)));

  auto work = [&](unsigned worker, std::exception_ptr& err) {
    try {
      for (std::size_t ch = worker; ch < chunks; ch += threads) {
        Rng rng = substream(seed, "sample_chunk", ch);
        const std::size_t end = std::min(count, (ch + 1) * kChunk);
        for (std::size_t i = ch * kChunk; i < end; ++i) rows[i] = sampler.sample_row(rng);
      }
    } catch (...) {
      err = std::current_exception();
    }
  };
  std::vector<std::exception_ptr> errors(threads);
  if (threads <= 1) {
    work(0, errors[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, std::ref(errors[w]));
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

// ---------------------------------------------------------------- admissibility

Admissibility generic_admissibility(const SymmetricUnimodal& g, int n) {
  if (n < 2) throw DomainError("generic_admissibility: n must be at least 2");
  std::vector<double> grid;
  for (int i = -400; i <= 400; ++i) grid.push_back(i * 0.05);
  for (double x = 20.0 * 1.05; x <= 1e4; x *= 1.05) {
    grid.push_back(x);
    grid.push_back(-x);
  }
  std::sort(grid.begin(), grid.end());
  auto phi = [&](double x) { return 1.0 / std::sqrt(g.density(x)); };
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = phi(grid[i]);

  Admissibility out;
  out.min_second_difference = kInf;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double left = (v[i] - v[i - 1]) / (grid[i] - grid[i - 1]);
    const double right = (v[i + 1] - v[i]) / (grid[i + 1] - grid[i]);
    const double dd = 2.0 * (right - left) / (grid[i + 1] - grid[i - 1]);
    if (dd < out.min_second_difference) {
      out.min_second_difference = dd;
      out.witness_x = grid[i];
    }
  }
  out.ok = out.min_second_difference >= -1e-9;
  if (out.ok) out.witness_x = std::numeric_limits<double>::quiet_NaN();
  out.q_max = is_standard_cauchy(g) ? std::log(static_cast<double>(n - 1)) / kPi : g.center_limit(n);
  return out;
}

}  // namespace mixcenter
