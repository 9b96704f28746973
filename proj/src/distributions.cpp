#include "mixcenter/distributions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mixcenter/errors.hpp"
#include "mixcenter/numerics.hpp"

namespace mixcenter {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_level(double t, const char* who) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError(std::string(who) + ": level must lie in (0, 1)");
}

}  // namespace

std::string to_string(MeanStatus s) {
  switch (s) {
    case MeanStatus::finite: return "finite";
    case MeanStatus::plus_infinity: return "+inf";
    case MeanStatus::minus_infinity: return "-inf";
    case MeanStatus::undefined: return "undefined";
  }
  return "undefined";
}

// ---------------------------------------------------------------- base class

std::vector<Atom> Distribution::atoms_between(double, double) const {
  throw DomainError(kind() + ": law has no atoms");
}

double Distribution::density(double) const {
  throw DomainError(kind() + ": law has no Lebesgue density");
}

double Distribution::mean() const {
  throw DomainError(kind() + ": mean is " + to_string(mean_status()));
}

double Distribution::partial_expectation(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError(kind() + ": partial expectation needs finite bounds");
  return numerics::integrate_checked([this](double x) { return x * density(x); }, lo, hi,
                                     {1e-13, 1e-12, 4000});
}

double SymmetricUnimodal::inverse_density(double y) const {
  if (y <= 0.0) return kInf;
  const double peak = density(0.0);
  if (y > peak * (1.0 + 1e-15)) throw DomainError(kind() + ": inverse_density above the mode");
  if (y >= peak) return 0.0;
  double hi = 1.0;
  while (density(hi) > y) hi *= 2.0;
  auto g = [&](double x) { return density(x) - y; };
  return numerics::brent_root(g, 0.0, hi, peak - y, density(hi) - y);
}

double SymmetricUnimodal::centered_moment(double lo, double hi, double c) const {
  if (!(hi > lo)) return 0.0;
  auto g = [&](double x) { return (x - c) * density(x); };
  const numerics::QuadOptions opt{1e-16, 1e-13, 4000};
  if (lo < 0.0 && hi > 0.0)
    return numerics::integrate_checked(g, lo, 0.0, opt) + numerics::integrate_checked(g, 0.0, hi, opt);
  return numerics::integrate_checked(g, lo, hi, opt);
}

// ---------------------------------------------------------------- Cauchy

Cauchy::Cauchy(double scale) : scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("cauchy: scale must be positive");
}

double Cauchy::cdf(double x) const {
  const double z = x / scale_;
  if (z < -1.0) return std::atan(-1.0 / z) / kPi;
  return 0.5 + std::atan(z) / kPi;
}

double Cauchy::survival(double x) const {
  const double z = x / scale_;
  if (z > 1.0) return std::atan(1.0 / z) / kPi;
  return 0.5 - std::atan(z) / kPi;
}

double Cauchy::quantile(double t) const { return scale_ * cauchy_quantile(t); }

double Cauchy::density(double x) const {
  const double z = x / scale_;
  return 1.0 / (kPi * scale_ * (1.0 + z * z));
}

double Cauchy::density_derivative(double x) const {
  const double z = x / scale_;
  const double d = 1.0 + z * z;
  return -2.0 * z / (kPi * scale_ * scale_ * d * d);
}

double Cauchy::inverse_density(double y) const {
  return scale_ * cauchy_inverse_density(y * scale_);
}

double Cauchy::centered_moment(double lo, double hi, double c) const {
  if (!(hi > lo)) return 0.0;
  return partial_expectation(lo, hi) - c * (cdf(hi) - cdf(lo));
}

double Cauchy::partial_expectation(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  const double a = lo / scale_, b = hi / scale_;
  // log((1 + b^2) / (1 + a^2)) written as log1p of the relative change.
  const double ratio = (b - a) * (b + a) / (1.0 + a * a);
  return scale_ * std::log1p(ratio) / (2.0 * kPi);
}

double Cauchy::center_limit(int n) const {
  return scale_ * std::log(static_cast<double>(n - 1)) / kPi;
}

json Cauchy::to_json() const { return {{"kind", "cauchy"}, {"scale", scale_}}; }

double cauchy_quantile(double t) {
  require_level(t, "cauchy_quantile");
  if (t == 0.5) return 0.0;
  if (t < 0.5) return -1.0 / std::tan(kPi * t);
  return 1.0 / std::tan(kPi * (1.0 - t));
}

double cauchy_inverse_density(double y) {
  if (y <= 0.0) return kInf;
  const double peak = 1.0 / kPi;
  if (y > peak * (1.0 + 4e-16)) throw DomainError("cauchy_inverse_density: y above 1/pi");
  const double v = 1.0 / (kPi * y) - 1.0;
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

// ---------------------------------------------------------------- finite

FiniteDiscrete::FiniteDiscrete(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("finite: at least one atom required");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  long double total = 0.0L;
  for (const Atom& a : atoms) {
    if (!(a.prob > 0.0 && a.prob <= 1.0) || !std::isfinite(a.value))
      throw DomainError("finite: atom probabilities must lie in (0, 1]");
    if (!atoms_.empty() && atoms_.back().value == a.value) atoms_.back().prob += a.prob;
    else atoms_.push_back(a);
    total += a.prob;
  }
  if (std::abs(static_cast<double>(total - 1.0L)) > 1e-12)
    throw DomainError("finite: probabilities must sum to 1");
  long double acc = 0.0L;
  for (const Atom& a : atoms_) {
    acc += a.prob;
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0L;
}

double FiniteDiscrete::cdf(double x) const {
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                             [](double v, const Atom& a) { return v < a.value; });
  if (it == atoms_.begin()) return 0.0;
  return static_cast<double>(cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1]);
}

double FiniteDiscrete::cdf_left(double x) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                             [](const Atom& a, double v) { return a.value < v; });
  if (it == atoms_.begin()) return 0.0;
  return static_cast<double>(cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1]);
}

double FiniteDiscrete::quantile(double t) const {
  require_level(t, "finite quantile");
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), static_cast<long double>(t));
  if (it == cumulative_.end()) return atoms_.back().value;
  return atoms_[static_cast<std::size_t>(it - cumulative_.begin())].value;
}

std::vector<Atom> FiniteDiscrete::atoms_between(double lo, double hi) const {
  std::vector<Atom> out;
  for (const Atom& a : atoms_)
    if (a.value >= lo && a.value <= hi) out.push_back(a);
  return out;
}

double FiniteDiscrete::mean() const {
  long double m = 0.0L;
  for (const Atom& a : atoms_) m += static_cast<long double>(a.value) * a.prob;
  return static_cast<double>(m);
}

double FiniteDiscrete::partial_expectation(double lo, double hi) const {
  long double s = 0.0L;
  for (const Atom& a : atoms_)
    if (a.value > lo && a.value < hi) s += static_cast<long double>(a.value) * a.prob;
  return static_cast<double>(s);
}

json FiniteDiscrete::to_json() const {
  json atoms = json::array();
  for (const Atom& a : atoms_) atoms.push_back({a.value, a.prob});
  return {{"kind", "finite"}, {"atoms", atoms}};
}

// ---------------------------------------------------------------- ex01 laws

CountableDiscreteEx01::CountableDiscreteEx01(Kind kind, int truncation_K)
    : which_(kind), K_(truncation_K) {
  if (truncation_K < 1 || truncation_K > 1000) throw DomainError("ex01: truncation_K must be in [1, 1000]");
}

std::vector<Atom> CountableDiscreteEx01::pmf_table() const {
  std::vector<Atom> out;
  for (int k = 0; k <= K_; ++k) {
    const double p = std::ldexp(1.0, -(k + 1));
    out.push_back({which_ == Kind::nu ? std::ldexp(1.0, k) : -std::ldexp(1.0, k + 1), p});
  }
  if (which_ == Kind::gamma) std::reverse(out.begin(), out.end());
  return out;
}

long double CountableDiscreteEx01::truncated_mass() const {
  long double s = 0.0L;
  for (const Atom& a : pmf_table()) s += static_cast<long double>(a.prob);
  return s;
}

namespace {

// ceil(log2 v) for v > 0, exact for powers of two.
int ceil_log2(double v) {
  int e = 0;
  const double m = std::frexp(v, &e);
  return m == 0.5 ? e - 1 : e;
}

}  // namespace

double CountableDiscreteEx01::cdf(double x) const {
  if (which_ == Kind::nu) {
    if (x < 1.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    int e = 0;
    std::frexp(x, &e);  // x in [2^(e-1), 2^e)
    return 1.0 - std::ldexp(1.0, -e);
  }
  if (x >= -2.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  // P(2^(Z+1) >= -x) = P(Z >= ceil(log2(-x)) - 1)
  return std::ldexp(1.0, -(ceil_log2(-x) - 1));
}

double CountableDiscreteEx01::cdf_left(double x) const {
  if (which_ == Kind::nu) {
    if (x <= 1.0) return 0.0;
    return cdf(std::nextafter(x, -kInf));
  }
  if (x > -2.0) return 1.0;
  return cdf(std::nextafter(x, -kInf));
}

double CountableDiscreteEx01::quantile(double t) const {
  require_level(t, "ex01 quantile");
  int e = 0;
  if (which_ == Kind::nu) {
    std::frexp(1.0 - t, &e);
    return std::ldexp(1.0, std::max(0, -e));
  }
  const double m = std::frexp(t, &e);
  const int k = std::max(0, m > 0.5 ? -e : 1 - e);
  return -std::ldexp(1.0, k + 1);
}

std::vector<Atom> CountableDiscreteEx01::atoms_between(double lo, double hi) const {
  std::vector<Atom> out;
  for (int k = 0; k < 1100; ++k) {
    const double v = which_ == Kind::nu ? std::ldexp(1.0, k) : -std::ldexp(1.0, k + 1);
    if (!std::isfinite(v)) break;
    if (v >= lo && v <= hi) out.push_back({v, std::ldexp(1.0, -(k + 1))});
    if (which_ == Kind::nu ? v > hi : v < lo) break;
  }
  if (which_ == Kind::gamma) std::reverse(out.begin(), out.end());
  return out;
}

double CountableDiscreteEx01::partial_expectation(double lo, double hi) const {
  // Every atom carries |x| p = 1/2 (nu) or 1 (gamma).
  if (!(hi > lo)) return 0.0;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    if ((which_ == Kind::nu && hi == kInf) || (which_ == Kind::gamma && lo == -kInf))
      return which_ == Kind::nu ? kInf : -kInf;
  }
  double count = 0.0;
  for (const Atom& a : atoms_between(lo, hi))
    if (a.value > lo && a.value < hi) count += 1.0;
  return which_ == Kind::nu ? 0.5 * count : -count;
}

double CountableDiscreteEx01::sample(Rng& rng) const {
  int z = 0;
  for (;;) {
    const std::uint64_t bits = rng.next();
    if (bits != 0) {
      z += std::countr_zero(bits);
      break;
    }
    z += 64;
  }
  return which_ == Kind::nu ? std::ldexp(1.0, z) : -std::ldexp(1.0, z + 1);
}

json CountableDiscreteEx01::to_json() const { return {{"kind", kind()}, {"K", K_}}; }

// ---------------------------------------------------------------- atom + uniform

AtomPlusUniform::AtomPlusUniform(double atom_x, double right_y, double atom_weight)
    : x_(atom_x), y_(right_y), alpha_(atom_weight) {
  if (!(right_y > atom_x)) throw DomainError("atom_uniform: need y > x");
  if (!(atom_weight >= 0.0 && atom_weight <= 1.0)) throw DomainError("atom_uniform: alpha must be in [0, 1]");
}

double AtomPlusUniform::cdf(double v) const {
  if (v < x_) return 0.0;
  if (v >= y_) return 1.0;
  return alpha_ + (1.0 - alpha_) * (v - x_) / (y_ - x_);
}

double AtomPlusUniform::cdf_left(double v) const {
  if (v <= x_) return 0.0;
  return cdf(v);
}

double AtomPlusUniform::quantile(double t) const {
  require_level(t, "atom_uniform quantile");
  if (t <= alpha_) return x_;
  return x_ + (y_ - x_) * (t - alpha_) / (1.0 - alpha_);
}

std::vector<Atom> AtomPlusUniform::atoms_between(double lo, double hi) const {
  if (alpha_ > 0.0 && x_ >= lo && x_ <= hi) return {{x_, alpha_}};
  return {};
}

double AtomPlusUniform::density(double v) const {
  if (alpha_ > 0.0) return Distribution::density(v);
  return (v >= x_ && v <= y_) ? 1.0 / (y_ - x_) : 0.0;
}

double AtomPlusUniform::mean() const { return alpha_ * x_ + (1.0 - alpha_) * 0.5 * (x_ + y_); }

double AtomPlusUniform::partial_expectation(double lo, double hi) const {
  double s = 0.0;
  if (alpha_ > 0.0 && x_ > lo && x_ < hi) s += alpha_ * x_;
  const double a = std::max(lo, x_), b = std::min(hi, y_);
  if (b > a) s += (1.0 - alpha_) * 0.5 * (b * b - a * a) / (y_ - x_);
  return s;
}

json AtomPlusUniform::to_json() const {
  return {{"kind", "atom_uniform"}, {"x", x_}, {"y", y_}, {"alpha", alpha_}};
}

// ---------------------------------------------------------------- uniform

Uniform::Uniform(double a, double b) : a_(a), b_(b) {
  if (!(b > a)) throw DomainError("uniform: need a < b");
}

double Uniform::cdf(double x) const {
  if (x <= a_) return 0.0;
  if (x >= b_) return 1.0;
  return (x - a_) / (b_ - a_);
}

double Uniform::quantile(double t) const {
  require_level(t, "uniform quantile");
  return a_ + t * (b_ - a_);
}

double Uniform::density(double x) const { return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0; }

double Uniform::partial_expectation(double lo, double hi) const {
  const double a = std::max(lo, a_), b = std::min(hi, b_);
  if (!(b > a)) return 0.0;
  return 0.5 * (b * b - a * a) / (b_ - a_);
}

json Uniform::to_json() const { return {{"kind", "uniform"}, {"a", a_}, {"b", b_}}; }

// ---------------------------------------------------------------- Pareto

Pareto::Pareto(double alpha, double x_m) : alpha_(alpha), xm_(x_m) {
  if (!(alpha > 0.0) || !(x_m > 0.0)) throw DomainError("pareto: alpha and x_m must be positive");
}

double Pareto::cdf(double x) const { return x <= xm_ ? 0.0 : -std::expm1(alpha_ * std::log(xm_ / x)); }

double Pareto::quantile(double t) const {
  require_level(t, "pareto quantile");
  return xm_ * std::pow(1.0 - t, -1.0 / alpha_);
}

double Pareto::density(double x) const {
  return x < xm_ ? 0.0 : alpha_ * std::pow(xm_, alpha_) * std::pow(x, -alpha_ - 1.0);
}

double Pareto::mean() const {
  if (alpha_ <= 1.0) return Distribution::mean();
  return alpha_ * xm_ / (alpha_ - 1.0);
}

double Pareto::partial_expectation(double lo, double hi) const {
  const double a = std::max(lo, xm_);
  if (!(hi > a)) return 0.0;
  const double c = alpha_ * std::pow(xm_, alpha_);
  if (alpha_ == 1.0) return c * std::log(hi / a);
  if (hi == kInf) return alpha_ > 1.0 ? c * std::pow(a, 1.0 - alpha_) / (alpha_ - 1.0) : kInf;
  return c * (std::pow(hi, 1.0 - alpha_) - std::pow(a, 1.0 - alpha_)) / (1.0 - alpha_);
}

json Pareto::to_json() const { return {{"kind", "pareto"}, {"alpha", alpha_}, {"scale", xm_}}; }

// ---------------------------------------------------------------- mixture

Mixture::Mixture(std::vector<double> weights, std::vector<DistributionPtr> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (weights_.empty() || weights_.size() != components_.size())
    throw DomainError("mixture: weights and components must have equal nonzero length");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw DomainError("mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture: weights must sum to 1");
}

double Mixture::cdf(double x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * components_[i]->cdf(x);
  return std::min(1.0, s);
}

double Mixture::cdf_left(double x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * components_[i]->cdf_left(x);
  return std::min(1.0, s);
}

double Mixture::quantile(double t) const {
  require_level(t, "mixture quantile");
  double lo = kInf, hi = -kInf;
  for (const auto& c : components_) {
    lo = std::min(lo, c->quantile(t));
    hi = std::max(hi, c->quantile(t));
  }
  if (is_discrete()) {
    // The answer is an atom of some component inside [lo, hi].
    std::vector<Atom> cand = atoms_between(lo, hi);
    for (const Atom& a : cand)
      if (cdf(a.value) >= t) return a.value;
    return hi;
  }
  for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= t) hi = mid;
    else lo = mid;
  }
  return hi;
}

bool Mixture::is_discrete() const {
  return std::all_of(components_.begin(), components_.end(), [](const auto& c) { return c->is_discrete(); });
}

bool Mixture::has_atoms() const {
  return std::any_of(components_.begin(), components_.end(), [](const auto& c) { return c->has_atoms(); });
}

std::vector<Atom> Mixture::atoms_between(double lo, double hi) const {
  std::vector<Atom> all;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (!components_[i]->has_atoms()) continue;
    for (Atom a : components_[i]->atoms_between(lo, hi)) {
      a.prob *= weights_[i];
      all.push_back(a);
    }
  }
  std::sort(all.begin(), all.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::vector<Atom> merged;
  for (const Atom& a : all) {
    if (!merged.empty() && merged.back().value == a.value) merged.back().prob += a.prob;
    else merged.push_back(a);
  }
  return merged;
}

double Mixture::density(double x) const {
  if (has_atoms()) return Distribution::density(x);
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * components_[i]->density(x);
  return s;
}

MeanStatus Mixture::mean_status() const {
  bool plus = false, minus = false;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    switch (components_[i]->mean_status()) {
      case MeanStatus::undefined: return MeanStatus::undefined;
      case MeanStatus::plus_infinity: plus = true; break;
      case MeanStatus::minus_infinity: minus = true; break;
      case MeanStatus::finite: break;
    }
  }
  if (plus && minus) return MeanStatus::undefined;
  if (plus) return MeanStatus::plus_infinity;
  if (minus) return MeanStatus::minus_infinity;
  return MeanStatus::finite;
}

double Mixture::mean() const {
  if (mean_status() != MeanStatus::finite) return Distribution::mean();
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] > 0.0) s += weights_[i] * components_[i]->mean();
  return s;
}

double Mixture::partial_expectation(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] > 0.0) s += weights_[i] * components_[i]->partial_expectation(lo, hi);
  return s;
}

double Mixture::sample(Rng& rng) const {
  double u = rng.uniform();
  std::size_t i = 0;
  for (; i + 1 < weights_.size(); ++i) {
    if (u < weights_[i]) break;
    u -= weights_[i];
  }
  return components_[i]->sample(rng);
}

json Mixture::to_json() const {
  json comps = json::array();
  for (const auto& c : components_) comps.push_back(c->to_json());
  return {{"kind", "mixture"}, {"weights", weights_}, {"components", comps}};
}

// ---------------------------------------------------------------- reflected

Reflected::Reflected(DistributionPtr base) : base_(std::move(base)) {
  if (!base_) throw DomainError("reflected: null base");
}

double Reflected::cdf(double x) const { return 1.0 - base_->cdf_left(-x); }
double Reflected::cdf_left(double x) const { return 1.0 - base_->cdf(-x); }

double Reflected::quantile(double t) const {
  require_level(t, "reflected quantile");
  // inf{x : P(-X <= x) >= t} = -inf{y : F(y) > 1 - t}
  const double s = 1.0 - t;
  return -base_->quantile(base_->has_atoms() ? std::nextafter(s, 1.0) : s);
}

std::vector<Atom> Reflected::atoms_between(double lo, double hi) const {
  std::vector<Atom> out = base_->atoms_between(-hi, -lo);
  for (Atom& a : out) a.value = -a.value;
  std::reverse(out.begin(), out.end());
  return out;
}

MeanStatus Reflected::mean_status() const {
  switch (base_->mean_status()) {
    case MeanStatus::plus_infinity: return MeanStatus::minus_infinity;
    case MeanStatus::minus_infinity: return MeanStatus::plus_infinity;
    default: return base_->mean_status();
  }
}

double Reflected::partial_expectation(double lo, double hi) const {
  return -base_->partial_expectation(-hi, -lo);
}

json Reflected::to_json() const { return {{"kind", "reflected"}, {"base", base_->to_json()}}; }

// ---------------------------------------------------------------- generic density

namespace {
constexpr int kMinExp = -8;
constexpr int kMaxExp = 40;
}  // namespace

GenericDensity::GenericDensity(Fn density, Fn derivative, json spec)
    : raw_(std::move(density)), raw_d_(std::move(derivative)), spec_(std::move(spec)) {
  // Symmetry and strict unimodality on a grid spanning several decades.
  for (int k = -40; k <= 60; ++k) {
    const double x = std::pow(10.0, k / 10.0);
    const double gp = raw_(x), gm = raw_(-x);
    if (!(gp > 0.0)) throw DomainError("generic density: must be strictly positive");
    if (std::abs(gp - gm) > 1e-12 * std::max(1.0, gp)) throw DomainError("generic density: not symmetric");
    if (!(raw_d_(x) < 0.0) || !(raw_d_(-x) > 0.0))
      throw DomainError("generic density: not strictly unimodal at x = " + std::to_string(x));
  }
  const numerics::QuadOptions opt{1e-15, 1e-13, 4000};
  double acc = numerics::integrate_checked(raw_, 0.0, std::ldexp(1.0, kMinExp), opt);
  anchors_.push_back(acc);
  for (int k = kMinExp + 1; k <= kMaxExp; ++k) {
    acc += numerics::integrate_checked(raw_, std::ldexp(1.0, k - 1), std::ldexp(1.0, k), opt);
    anchors_.push_back(acc);
  }
  // Tail beyond 2^kMaxExp by the substitution x = 1/u.
  const double tail = numerics::integrate_checked(
      [this](double u) { return u > 0.0 ? raw_(1.0 / u) / (u * u) : 0.0; }, 0.0,
      std::ldexp(1.0, -kMaxExp), opt);
  half_mass_ = acc + tail;
  norm_ = 2.0 * half_mass_;
}

double GenericDensity::half_integral(double x) const {
  const numerics::QuadOptions opt{1e-15, 1e-13, 4000};
  if (x <= std::ldexp(1.0, kMinExp)) return numerics::integrate_checked(raw_, 0.0, x, opt);
  if (x >= std::ldexp(1.0, kMaxExp)) {
    const double tail = numerics::integrate_checked(
        [this](double u) { return u > 0.0 ? raw_(1.0 / u) / (u * u) : 0.0; }, 0.0, 1.0 / x, opt);
    return half_mass_ - tail;
  }
  int e = 0;
  std::frexp(x, &e);  // x in [2^(e-1), 2^e)
  const int k = e - 1;
  const double base = std::ldexp(1.0, k);
  return anchors_[static_cast<std::size_t>(k - kMinExp)] + numerics::integrate_checked(raw_, base, x, opt);
}

double GenericDensity::cdf(double x) const {
  if (x == 0.0) return 0.5;
  if (!std::isfinite(x)) return x > 0.0 ? 1.0 : 0.0;
  const double h = half_integral(std::abs(x)) / norm_;
  return x > 0.0 ? 0.5 + h : 0.5 - h;
}

double GenericDensity::quantile(double t) const {
  require_level(t, "generic quantile");
  if (t == 0.5) return 0.0;
  if (t < 0.5) return -quantile(1.0 - t);
  const double target = (t - 0.5) * norm_;
  double hi = 1.0;
  while (half_integral(hi) < target) hi *= 2.0;
  auto g = [&](double x) { return half_integral(x) - target; };
  return numerics::brent_root(g, 0.0, hi, -target, g(hi), 1e-14 * hi);
}

double GenericDensity::center_limit(int n) const {
  // integral of x g(x) on [t, (n-1) t] with x = e^u
  auto window = [&](double t) {
    const double u0 = std::log(t), u1 = u0 + std::log(static_cast<double>(n - 1));
    return numerics::integrate_checked(
        [&](double u) {
          const double x = std::exp(u);
          return x * x * density(x);
        },
        u0, u1, {1e-14, 1e-12, 2000});
  };
  double best = kInf;
  for (int k = 6; k <= 12; ++k) best = std::min(best, window(std::pow(10.0, k)));
  return best;
}

double GenericDensity::partial_expectation(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  return centered_moment(lo, hi, 0.0);
}

std::shared_ptr<const GenericDensity> power_density(double p) {
  if (!(p > 1.0)) throw DomainError("power_density: exponent must exceed 1");
  auto g = [p](double x) { return 1.0 / (1.0 + std::pow(std::abs(x), p)); };
  auto dg = [p](double x) {
    const double a = std::abs(x);
    if (a == 0.0) return 0.0;
    const double d = 1.0 + std::pow(a, p);
    return -std::copysign(p * std::pow(a, p - 1.0) / (d * d), x);
  };
  return std::make_shared<GenericDensity>(g, dg, json{{"kind", "power_density"}, {"exponent", p}});
}

// ---------------------------------------------------------------- free functions

double avg_quantile(const Distribution& mu, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < beta && beta < 1.0))
    throw DomainError("avg_quantile: need 0 < alpha < beta < 1");
  const double width = beta - alpha;
  if (mu.has_atoms()) {
    // Exact integration over quantile plateaus:
    //   int_a^b q = q(a) (F(q(a)) - a) + E[X; q(a) < X < q(b)] + q(b) (b - F(q(b)-)).
    const double qa = mu.quantile(alpha), qb = mu.quantile(beta);
    if (qa == qb) return qa;
    const double left = qa * (mu.cdf(qa) - alpha);
    const double right = qb * (beta - mu.cdf_left(qb));
    return (left + mu.partial_expectation(qa, qb) + right) / width;
  }
  const numerics::QuadOptions opt{1e-10 * width, 1e-13, 8000};
  const auto q = [&mu](double t) { return mu.quantile(t); };
  numerics::QuadResult r = numerics::integrate(q, alpha, beta, opt);
  if (!r.converged) throw NumericError("avg_quantile: quadrature did not converge", r.abs_error);
  return r.value / width;
}

double integrated_survival(const Distribution& mu, double a, double b) {
  if (!(b > a)) return 0.0;
  // int_a^b P(X > x) dx = E[clamp(X, a, b)] - a
  const double clamped = a * mu.cdf(a) + mu.partial_expectation(a, b) + b * (1.0 - mu.cdf_left(b));
  return clamped - a;
}

std::vector<double> sample(const Distribution& mu, Rng& rng, std::size_t count) {
  std::vector<double> out(count);
  for (double& x : out) x = mu.sample(rng);
  return out;
}

DistributionPtr distribution_from_json(const json& spec) {
  if (!spec.is_object() || !spec.contains("kind")) throw ParseError("distribution spec needs a \"kind\" field");
  const std::string kind = spec.at("kind").get<std::string>();
  try {
    if (kind == "cauchy") return std::make_shared<Cauchy>(spec.value("scale", 1.0));
    if (kind == "finite") {
      std::vector<Atom> atoms;
      for (const auto& a : spec.at("atoms")) {
        if (a.is_array()) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        else atoms.push_back({a.at("value").get<double>(), a.at("prob").get<double>()});
      }
      return std::make_shared<FiniteDiscrete>(std::move(atoms));
    }
    if (kind == "point") return std::make_shared<FiniteDiscrete>(FiniteDiscrete::point(spec.at("value").get<double>()));
    if (kind == "ex01_nu")
      return std::make_shared<CountableDiscreteEx01>(CountableDiscreteEx01::Kind::nu, spec.value("K", 20));
    if (kind == "ex01_gamma")
      return std::make_shared<CountableDiscreteEx01>(CountableDiscreteEx01::Kind::gamma, spec.value("K", 20));
    if (kind == "ex01_mu") {
      const int K = spec.value("K", 20);
      return std::make_shared<Mixture>(
          std::vector<double>{2.0 / 3.0, 1.0 / 3.0},
          std::vector<DistributionPtr>{
              std::make_shared<CountableDiscreteEx01>(CountableDiscreteEx01::Kind::nu, K),
              std::make_shared<CountableDiscreteEx01>(CountableDiscreteEx01::Kind::gamma, K)});
    }
    if (kind == "atom_uniform")
      return std::make_shared<AtomPlusUniform>(spec.at("x").get<double>(), spec.at("y").get<double>(),
                                               spec.at("alpha").get<double>());
    if (kind == "uniform") return std::make_shared<Uniform>(spec.value("a", 0.0), spec.value("b", 1.0));
    if (kind == "pareto") return std::make_shared<Pareto>(spec.at("alpha").get<double>(), spec.value("scale", 1.0));
    if (kind == "power_density") return power_density(spec.at("exponent").get<double>());
    if (kind == "reflected") return std::make_shared<Reflected>(distribution_from_json(spec.at("base")));
    if (kind == "mixture") {
      std::vector<DistributionPtr> comps;
      for (const auto& c : spec.at("components")) comps.push_back(distribution_from_json(c));
      return std::make_shared<Mixture>(spec.at("weights").get<std::vector<double>>(), std::move(comps));
    }
  } catch (const json::exception& e) {
    throw ParseError("distribution spec \"" + kind + "\": " + e.what());
  }
  throw ParseError("unknown distribution kind \"" + kind + "\"");
}

std::vector<DistributionPtr> marginals_from_json(const json& doc) {
  const json& list = doc.is_object() && doc.contains("marginals") ? doc.at("marginals") : doc;
  if (!list.is_array() || list.empty()) throw ParseError("marginals: expected a non-empty array");
  std::vector<DistributionPtr> out;
  for (const auto& item : list) {
    const int repeat = item.is_object() ? item.value("repeat", 1) : 1;
    DistributionPtr d = distribution_from_json(item);
    for (int i = 0; i < repeat; ++i) out.push_back(d);
  }
  return out;
}

}  // namespace mixcenter
