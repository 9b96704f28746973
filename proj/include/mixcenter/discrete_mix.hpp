#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixcenter/distributions.hpp"
#include "mixcenter/rng.hpp"

namespace mixcenter {

/// Finite joint law: support tuples with weights.
struct Coupling {
  int n = 0;
  std::vector<std::vector<double>> support;
  std::vector<double> weights;
  double tail_mass = 0.0;  // mass folded into the last atoms by a truncation

  std::size_t size() const { return weights.size(); }
  /// Projection on coordinate i, equal values merged, sorted by value.
  std::vector<Atom> marginal(int i) const;
  /// Merges identical tuples and drops zero weights; rows sorted lexicographically.
  Coupling canonical() const;

  json to_json() const;
  static Coupling from_json(const json& doc);
};

struct CouplingCheck {
  bool ok = false;
  double weight_sum_error = 0.0;
  double min_weight = 0.0;
  double max_marginal_residual = 0.0;  // against the declared marginals, per atom
  double max_sum_deviation = 0.0;      // |row sum - C|
};

/// Weights >= 0 summing to 1 within 1e-12, marginals within 1e-10 per atom,
/// every support tuple summing to C within sum_tol.
CouplingCheck check_coupling(const Coupling& coupling, const std::vector<FiniteDiscrete>& marginals,
                             double C, double sum_tol);

enum class LpVerdict { feasible, infeasible, borderline };
std::string to_string(LpVerdict v);

enum class LpArithmetic { floating, exact };

struct LpOptions {
  double tol = 1e-9;
  LpArithmetic arithmetic = LpArithmetic::floating;
  std::size_t max_variables = 1'000'000;
  std::size_t max_exact_variables = 10'000;
};

struct FeasibilityResult {
  LpVerdict verdict = LpVerdict::infeasible;
  double center = 0.0;
  std::optional<Coupling> coupling;
  /// Farkas vector y over the marginal constraints, indexed [marginal][atom]:
  /// y . A_j <= 0 for every column and y . b > 0.
  std::vector<std::vector<double>> farkas;
  double farkas_gap = 0.0;  // y . b
  double phase1_objective = 0.0;
  double residual = 0.0;    // max marginal residual of the returned coupling
  std::size_t variables = 0;
  std::size_t pivots = 0;
  bool exact = false;

  json to_json() const;
};

/// Is there a coupling of the marginals supported on {x : |x_1 + ... + x_n - C| <= tol}?
FeasibilityResult lp_feasible_center(const std::vector<FiniteDiscrete>& marginals, double C,
                                     const LpOptions& opt = {});

struct CenterSet {
  std::vector<double> centers;  // sum centers C
  std::vector<Coupling> certificates;
  std::size_t candidates_total = 0;
  std::size_t candidates_examined = 0;  // after pruning by the quantile bounds
  std::vector<double> borderline;
  double bound_lower = 0.0;
  double bound_upper = 0.0;

  json to_json() const;
};

/// Every sum center of the marginals. Candidates are the distinct sums of
/// support points inside the quantile bounds.
CenterSet enumerate_centers(const std::vector<FiniteDiscrete>& marginals, const LpOptions& opt = {});

/// Same bounds as used by enumerate_centers, intersected over a few beta choices.
std::pair<double, double> discrete_center_bounds(const std::vector<FiniteDiscrete>& marginals);

/// The two exact couplings with sums 0 and 1 over Z = 0..K (and B in {0,1}).
/// The geometric tail Z > K is folded into Z = K + 1, so weights sum to 1
/// exactly and tail_mass = 2^-(K+1) reports the folded mass.
struct Ex01Couplings {
  Coupling mix_x;
  Coupling mix_y;
};
Ex01Couplings ex01_couplings(int K);

/// Average over all n! coordinate permutations (exact). Throws SizeError for n > 8.
Coupling exchangeable_permute(const Coupling& coupling);
/// One random permutation per support tuple; weights unchanged.
Coupling exchangeable_permute(const Coupling& coupling, Rng& rng);

/// The argument that 2 is not a 3-center sum of (2 nu + gamma) / 3: the
/// quantile bounds leave the sums {0, 1, 2}, no two support points sum to 1,
/// so P(sum = 2) <= P(X_1 != 1) = 2/3.
struct SumTwoExclusion {
  double a_star = 0.0;
  double b_star = 0.0;
  std::vector<long long> integer_sums;  // integer sums allowed by the bounds
  bool pair_sums_to_one = false;        // over the support up to 2^(K+1)
  long double p_x1_not_one = 0.0L;
  bool excludes_two = false;

  json to_json() const;
};
SumTwoExclusion sum_two_exclusion(int K);

}  // namespace mixcenter
