#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mixcenter/distributions.hpp"
#include "mixcenter/rearrangement.hpp"
#include "mixcenter/rng.hpp"

namespace mixcenter {

struct MixerConfig {
  int n = 3;
  double c = 0.0;
  int t_grid = 2048;
  double tail_eps = 1e-4;
  int ra_grid_m = 512;
  double root_tol = 1e-12;
  double t_min = 1e-6;
  std::uint64_t seed = kDefaultSeed;  // seeds the rearrangement tables only

  json to_json() const;
};

/// Root of A(t, .) parametrized by rho = f^{-1}(h) - c, so that differences
/// f(x) - h are formed without cancellation. rho = +inf means h = 0.
struct HRoot {
  double h = 0.0;
  double rho = std::numeric_limits<double>::infinity();
  double residual = 0.0;  // A(t, h)
};

struct MuTComponents {
  double t = 0.0, h = 0.0;
  double K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 0.0, Q = 0.0;
  double dh = 0.0;      // h'(t)
  double width = 0.0;   // K3 - (c - t)
  double p_two_point = 0.0;  // n K2 / Q
  double alpha = 0.0;   // atom weight of the atom + uniform part

  /// Mean of mu_t minus c, from the four components.
  double mean_offset(int n) const;
};

/// The quantities of the construction for one (n, c) and one symmetric
/// unimodal density. The standard Cauchy uses closed forms where they are
/// well conditioned; other densities go through quadrature.
class MixGeometry {
 public:
  explicit MixGeometry(const MixerConfig& cfg, SymmetricPtr density = nullptr);

  const MixerConfig& config() const { return cfg_; }
  bool closed_form() const { return closed_; }
  const SymmetricUnimodal& density() const { return *density_; }
  double q_max() const { return q_max_; }

  double f(double x) const { return density_->density(x); }
  /// f(c + s) - f(c + rho).
  double fdiff(double s, double rho) const;

  /// A(t, y) = integral over [c - t, c + (n-1) t] of (x - c) {f(x) - y}_+.
  double eval_A(double t, double y) const;
  double A_rho(double t, double rho) const;
  /// (n-1)^2 f(c + (n-1) t) - f(c - t).
  double eval_m(double t) const;

  /// Unique root of A(t, .) below f(c + t). rho_hint seeds the bracket.
  HRoot solve(double t, double rho_hint = std::numeric_limits<double>::quiet_NaN()) const;
  MuTComponents components(double t, const HRoot& root) const;

  /// nu_t(R) = Q((0, t]).
  double nu_total(double t, const HRoot& root) const;
  /// nu_t((-inf, y]).
  double nu_below(double t, const HRoot& root, double y) const;
  /// t where f(c + (n-1) t) = h(t), searched in [a, b].
  double k2_switch(double a, double b) const;

 private:
  double integrate_s(const std::function<double(double)>& g, double a, double b) const;

  MixerConfig cfg_;
  SymmetricPtr density_;
  bool closed_ = false;
  double q_max_ = 0.0;
};

double eval_A(double t, double y, const MixerConfig& cfg);
HRoot solve_h(double t, const MixerConfig& cfg);
double eval_m(double t, const MixerConfig& cfg);

/// Non-increasing piecewise-cubic Hermite interpolant of h with
/// Fritsch-Carlson limited slopes.
class HFunction {
 public:
  HFunction() = default;
  HFunction(std::vector<double> t, std::vector<double> h, std::vector<double> dh);

  double operator()(double t) const;
  double derivative(double t) const;
  const std::vector<double>& knots() const { return t_; }
  const std::vector<double>& values() const { return h_; }

 private:
  std::size_t cell(double t) const;
  std::vector<double> t_, h_, d_;
};

MuTComponents k_components(double t, const MixGeometry& geo, const HFunction& hfun);

/// Tabulated cdf of the mixing measure Q on the t-grid.
struct TMeasure {
  std::vector<double> t;
  std::vector<double> cdf;  // Q((0, t_j]), not normalized
  double total_mass = 0.0;
  double normalization = 1.0;  // 1 / total_mass
  double closed_form_mass = 0.0;  // nu_{T_max}(R)
  double t_max = 0.0;

  /// Inverse cdf of the renormalized measure, linear inside cells.
  double sample_t(double u) const;
};

struct KnotRecord {
  double t = 0.0;
  HRoot root;
  double A_zero = 0.0;  // A(t, 0)
  double m = 0.0;       // eval_m(t)
  MuTComponents comps;
};

TMeasure build_t_measure(const MixGeometry& geo, const std::vector<KnotRecord>& knots);

// ---------------------------------------------------------------------------

struct SampleRow {
  std::vector<double> x;
  double t = std::numeric_limits<double>::quiet_NaN();
  int branch = 0;  // 1 two-point, 2 atom + uniform, 0 other engines
  double row_sum = 0.0;
  double row_bound = 0.0;  // allowed |row_sum - n c|
};

/// Source of n-tuples with a common coordinate sum (in law or exactly).
class JointSampler {
 public:
  virtual ~JointSampler() = default;
  virtual int n() const = 0;
  virtual double center() const = 0;  // per-coordinate center c
  virtual SampleRow sample_row(Rng& rng) const = 0;
  virtual json metadata() const = 0;
};

using SamplerPtr = std::shared_ptr<const JointSampler>;

/// The construction for c in (0, q_max].
class CauchyMixer final : public JointSampler {
 public:
  explicit CauchyMixer(const MixerConfig& cfg, SymmetricPtr density = nullptr);

  int n() const override { return cfg_.n; }
  double center() const override { return cfg_.c; }
  SampleRow sample_row(Rng& rng) const override;
  json metadata() const override;

  /// One row drawn from mu_t for a given t.
  SampleRow sample_mu_t(double t, Rng& rng) const;

  const MixerConfig& config() const { return cfg_; }
  const MixGeometry& geometry() const { return geo_; }
  const HFunction& hfun() const { return hfun_; }
  const TMeasure& t_measure() const { return measure_; }
  const std::vector<KnotRecord>& knots() const { return knots_; }
  std::vector<double> k2_switches() const { return switches_; }
  double mass_deficit() const { return 1.0 - measure_.total_mass; }

  HRoot root_at(double t) const;
  MuTComponents components_at(double t) const;

  /// Normalized table for k atoms out of ra_grid_m: every row sums exactly
  /// to n (1 - k/m) / 2. Built on first use.
  const QuantileMatrix& atom_uniform_table(std::size_t k) const;
  /// Largest relative row rescaling applied while building tables so far.
  double table_rescale() const;

 private:
  MixerConfig cfg_;
  MixGeometry geo_;
  std::vector<KnotRecord> knots_;
  std::vector<double> switches_;
  HFunction hfun_;
  TMeasure measure_;

  struct TableCache;
  std::shared_ptr<TableCache> tables_;
};

/// Law of -X for X from the wrapped sampler, drawn with the same stream.
class ReflectedSampler final : public JointSampler {
 public:
  explicit ReflectedSampler(SamplerPtr base) : base_(std::move(base)) {}
  int n() const override { return base_->n(); }
  double center() const override { return -base_->center(); }
  SampleRow sample_row(Rng& rng) const override;
  json metadata() const override;

 private:
  SamplerPtr base_;
};

/// Even n, center 0: independent antithetic pairs (X, -X).
class AntitheticSampler final : public JointSampler {
 public:
  explicit AntitheticSampler(int n);
  int n() const override { return n_; }
  double center() const override { return 0.0; }
  SampleRow sample_row(Rng& rng) const override;
  json metadata() const override;

 private:
  int n_;
};

/// alpha X + (1 - alpha) Y for independent rows X, Y. For strictly 1-stable
/// marginals (Cauchy) the marginals are preserved.
class ConvexCombination final : public JointSampler {
 public:
  ConvexCombination(SamplerPtr a, SamplerPtr b, double alpha);
  int n() const override { return a_->n(); }
  double center() const override;
  SampleRow sample_row(Rng& rng) const override;
  json metadata() const override;

 private:
  SamplerPtr a_, b_;
  double alpha_;
};

/// Rows of a flattened table of the discretized Cauchy; center 0.
class RaTableSampler final : public JointSampler {
 public:
  RaTableSampler(int n, int m, std::uint64_t seed);
  int n() const override { return static_cast<int>(table_.cols()); }
  double center() const override { return 0.0; }
  SampleRow sample_row(Rng& rng) const override;
  json metadata() const override;
  double max_residual() const { return residual_; }

 private:
  QuantileMatrix table_;
  std::vector<double> bounds_;
  double residual_ = 0.0;
  int m_;
};

SamplerPtr convex_interpolate_mixes(SamplerPtr a, SamplerPtr b, double alpha);

/// Validates cfg and returns the sampler for its center: the construction for
/// c > 0, its reflection for c < 0, and for c = 0 antithetic pairs (even n)
/// or the midpoint combination of the +-q_max/2 mixers (odd n).
SamplerPtr make_joint_mix(const MixerConfig& cfg, SymmetricPtr density = nullptr);

/// "construction" (make_joint_mix) or "ra" (RaTableSampler; center 0 only).
SamplerPtr make_engine(const MixerConfig& cfg, const std::string& engine);

/// Draws count rows in fixed chunks, each from its own substream of seed, so
/// the output does not depend on the number of threads.
std::vector<SampleRow> sample_joint_mix(const JointSampler& sampler, std::uint64_t seed,
                                        std::size_t count, unsigned threads = 0);

struct Admissibility {
  bool ok = false;
  double q_max = 0.0;
  double witness_x = std::numeric_limits<double>::quiet_NaN();
  double min_second_difference = 0.0;
};

/// Convexity of sqrt(1/g) on a grid, and q_max = liminf of the integral of
/// x g(x) over [t, (n-1) t].
Admissibility generic_admissibility(const SymmetricUnimodal& g, int n);

}  // namespace mixcenter
