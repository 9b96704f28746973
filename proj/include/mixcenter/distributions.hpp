#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mixcenter/rng.hpp"

namespace mixcenter {

using json = nlohmann::json;

enum class MeanStatus { finite, plus_infinity, minus_infinity, undefined };

std::string to_string(MeanStatus s);

struct Atom {
  double value;
  double prob;
};

/// One-dimensional law. Implementations are immutable after construction.
///
/// The quantile is the left-continuous generalized inverse
/// q(t) = inf{x : F(x) >= t}.
class Distribution {
 public:
  virtual ~Distribution() = default;

  virtual std::string kind() const = 0;
  virtual double cdf(double x) const = 0;
  /// P(X < x).
  virtual double cdf_left(double x) const { return cdf(x); }
  virtual double survival(double x) const { return 1.0 - cdf(x); }
  virtual double quantile(double t) const = 0;

  /// Purely atomic law.
  virtual bool is_discrete() const { return false; }
  /// Law with at least one atom (discrete or mixed).
  virtual bool has_atoms() const { return is_discrete(); }
  /// Atoms in the closed interval [lo, hi]; only for laws with atoms.
  virtual std::vector<Atom> atoms_between(double lo, double hi) const;

  /// Lebesgue density; throws DomainError for laws with atoms.
  virtual double density(double x) const;

  /// Declared, not inferred numerically.
  virtual MeanStatus mean_status() const = 0;
  virtual double mean() const;

  /// Integral of x over the open interval (lo, hi) against the law.
  virtual double partial_expectation(double lo, double hi) const;

  virtual double sample(Rng& rng) const { return quantile(rng.uniform_open()); }

  virtual json to_json() const = 0;
};

using DistributionPtr = std::shared_ptr<const Distribution>;

/// Continuous law symmetric about 0 with a strictly unimodal, differentiable
/// density. This is the interface the joint-mix construction works against.
class SymmetricUnimodal : public Distribution {
 public:
  virtual double density_derivative(double x) const = 0;
  /// Positive solution of f(x) = y for y in (0, f(0)]; +inf for y <= 0.
  virtual double inverse_density(double y) const;
  /// Integral of (x - c) f(x) over [lo, hi].
  virtual double centered_moment(double lo, double hi, double c) const;
  /// True when centered_moment() and cdf() are closed forms.
  virtual bool closed_form() const { return false; }
  /// liminf over t -> inf of the integral of x f(x) on [t, (n-1) t].
  virtual double center_limit(int n) const = 0;

  MeanStatus mean_status() const override { return MeanStatus::undefined; }
};

using SymmetricPtr = std::shared_ptr<const SymmetricUnimodal>;

// --------------------------------------------------------------------------

class Cauchy final : public SymmetricUnimodal {
 public:
  explicit Cauchy(double scale = 1.0);
  double scale() const { return scale_; }

  std::string kind() const override { return "cauchy"; }
  double cdf(double x) const override;
  double survival(double x) const override;
  double quantile(double t) const override;
  double density(double x) const override;
  double density_derivative(double x) const override;
  double inverse_density(double y) const override;
  double centered_moment(double lo, double hi, double c) const override;
  double partial_expectation(double lo, double hi) const override;
  bool closed_form() const override { return true; }
  double center_limit(int n) const override;
  json to_json() const override;

 private:
  double scale_;
};

class FiniteDiscrete final : public Distribution {
 public:
  /// Atoms are sorted and equal values merged; probabilities must be positive
  /// and sum to 1 within 1e-12.
  explicit FiniteDiscrete(std::vector<Atom> atoms);
  static FiniteDiscrete point(double value) { return FiniteDiscrete({{value, 1.0}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }

  std::string kind() const override { return "finite"; }
  double cdf(double x) const override;
  double cdf_left(double x) const override;
  double quantile(double t) const override;
  bool is_discrete() const override { return true; }
  std::vector<Atom> atoms_between(double lo, double hi) const override;
  MeanStatus mean_status() const override { return MeanStatus::finite; }
  double mean() const override;
  double partial_expectation(double lo, double hi) const override;
  json to_json() const override;

 private:
  std::vector<Atom> atoms_;
  std::vector<long double> cumulative_;
};

/// The two integer-valued laws with infinite means: nu is the law of 2^Z and
/// gamma the law of -2^(Z+1), Z geometric with P(Z = k) = 2^-(k+1). The law is
/// handled exactly; truncation_K only sizes the pmf tables.
class CountableDiscreteEx01 final : public Distribution {
 public:
  enum class Kind { nu, gamma };
  CountableDiscreteEx01(Kind kind, int truncation_K);

  Kind which() const { return which_; }
  int truncation_K() const { return K_; }
  /// (value, probability) for Z = 0..K.
  std::vector<Atom> pmf_table() const;
  /// Sum of the table probabilities, accumulated in long double.
  long double truncated_mass() const;

  std::string kind() const override { return which_ == Kind::nu ? "ex01_nu" : "ex01_gamma"; }
  double cdf(double x) const override;
  double cdf_left(double x) const override;
  double quantile(double t) const override;
  bool is_discrete() const override { return true; }
  std::vector<Atom> atoms_between(double lo, double hi) const override;
  MeanStatus mean_status() const override {
    return which_ == Kind::nu ? MeanStatus::plus_infinity : MeanStatus::minus_infinity;
  }
  double partial_expectation(double lo, double hi) const override;
  double sample(Rng& rng) const override;
  json to_json() const override;

 private:
  Kind which_;
  int K_;
};

/// alpha * delta_x + (1 - alpha) * U[x, y].
class AtomPlusUniform final : public Distribution {
 public:
  AtomPlusUniform(double atom_x, double right_y, double atom_weight);
  double atom_x() const { return x_; }
  double right_y() const { return y_; }
  double atom_weight() const { return alpha_; }

  std::string kind() const override { return "atom_uniform"; }
  double cdf(double v) const override;
  double cdf_left(double v) const override;
  double quantile(double t) const override;
  bool has_atoms() const override { return alpha_ > 0.0; }
  std::vector<Atom> atoms_between(double lo, double hi) const override;
  double density(double v) const override;
  MeanStatus mean_status() const override { return MeanStatus::finite; }
  double mean() const override;
  double partial_expectation(double lo, double hi) const override;
  json to_json() const override;

 private:
  double x_, y_, alpha_;
};

class Uniform final : public Distribution {
 public:
  Uniform(double a, double b);
  std::string kind() const override { return "uniform"; }
  double cdf(double x) const override;
  double quantile(double t) const override;
  double density(double x) const override;
  MeanStatus mean_status() const override { return MeanStatus::finite; }
  double mean() const override { return 0.5 * (a_ + b_); }
  double partial_expectation(double lo, double hi) const override;
  json to_json() const override;

 private:
  double a_, b_;
};

/// Pareto with tail index alpha and minimum x_m; infinite mean for alpha <= 1.
class Pareto final : public Distribution {
 public:
  Pareto(double alpha, double x_m = 1.0);
  std::string kind() const override { return "pareto"; }
  double cdf(double x) const override;
  double quantile(double t) const override;
  double density(double x) const override;
  MeanStatus mean_status() const override {
    return alpha_ > 1.0 ? MeanStatus::finite : MeanStatus::plus_infinity;
  }
  double mean() const override;
  double partial_expectation(double lo, double hi) const override;
  json to_json() const override;

 private:
  double alpha_, xm_;
};

class Mixture final : public Distribution {
 public:
  Mixture(std::vector<double> weights, std::vector<DistributionPtr> components);

  std::string kind() const override { return "mixture"; }
  double cdf(double x) const override;
  double cdf_left(double x) const override;
  double quantile(double t) const override;
  bool is_discrete() const override;
  bool has_atoms() const override;
  std::vector<Atom> atoms_between(double lo, double hi) const override;
  double density(double x) const override;
  MeanStatus mean_status() const override;
  double mean() const override;
  double partial_expectation(double lo, double hi) const override;
  double sample(Rng& rng) const override;
  json to_json() const override;

 private:
  std::vector<double> weights_;
  std::vector<DistributionPtr> components_;
};

/// Law of -X for X ~ base.
class Reflected final : public Distribution {
 public:
  explicit Reflected(DistributionPtr base);
  std::string kind() const override { return "reflected"; }
  double cdf(double x) const override;
  double cdf_left(double x) const override;
  double quantile(double t) const override;
  bool is_discrete() const override { return base_->is_discrete(); }
  bool has_atoms() const override { return base_->has_atoms(); }
  std::vector<Atom> atoms_between(double lo, double hi) const override;
  double density(double x) const override { return base_->density(-x); }
  MeanStatus mean_status() const override;
  double mean() const override { return -base_->mean(); }
  double partial_expectation(double lo, double hi) const override;
  json to_json() const override;

 private:
  DistributionPtr base_;
};

/// Symmetric strictly unimodal density given by callables. The callable need
/// not be normalized; the constant is computed once. The cdf is built from
/// cached quadrature anchors on [0, inf) and reflected for x < 0.
class GenericDensity final : public SymmetricUnimodal {
 public:
  using Fn = std::function<double(double)>;
  /// Throws DomainError when symmetry or strict unimodality fails on the
  /// check grid.
  GenericDensity(Fn density, Fn derivative, json spec);

  double normalizer() const { return norm_; }

  std::string kind() const override { return spec_.value("kind", "generic"); }
  double cdf(double x) const override;
  double quantile(double t) const override;
  double density(double x) const override { return raw_(x) / norm_; }
  double density_derivative(double x) const override { return raw_d_(x) / norm_; }
  double center_limit(int n) const override;
  double partial_expectation(double lo, double hi) const override;
  json to_json() const override { return spec_; }

 private:
  double half_integral(double x) const;  // integral of raw density on [0, x]

  Fn raw_, raw_d_;
  json spec_;
  std::vector<double> anchors_;  // integral on [0, 2^k], k = kMinExp..kMaxExp
  double half_mass_ = 0.5;
  double norm_ = 1.0;
};

/// g(x) proportional to 1 / (1 + |x|^p).
std::shared_ptr<const GenericDensity> power_density(double exponent);

// --------------------------------------------------------------------------

/// tan(pi (t - 1/2)), evaluated without cancellation near 0 and 1.
double cauchy_quantile(double t);

/// Positive solution of 1 / (pi (1 + x^2)) = y; +inf for y <= 0.
double cauchy_inverse_density(double y);

/// Mean of the quantile function over [alpha, beta]. Laws with atoms are
/// integrated exactly over quantile plateaus; continuous laws use adaptive
/// quadrature with absolute tolerance 1e-10.
double avg_quantile(const Distribution& mu, double alpha, double beta);

/// Integral of the survival function over [a, b].
double integrated_survival(const Distribution& mu, double a, double b);

std::vector<double> sample(const Distribution& mu, Rng& rng, std::size_t count);

DistributionPtr distribution_from_json(const json& spec);
std::vector<DistributionPtr> marginals_from_json(const json& doc);

}  // namespace mixcenter
