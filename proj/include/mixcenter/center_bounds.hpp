#pragma once

#include <string>
#include <vector>

#include "mixcenter/distributions.hpp"

namespace mixcenter {

struct CenterInterval {
  enum class Kind { exact_formula, numeric_necessary_bound };
  double lo = 0.0;
  double hi = 0.0;
  Kind kind = Kind::exact_formula;
  int n = 2;

  json to_json() const;
};

std::string to_string(CenterInterval::Kind k);

struct JmBoundsInput {
  std::vector<DistributionPtr> marginals;
  std::vector<double> betas;
};

struct JmBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Necessary bounds on the sum center C of a joint mix:
/// sum_i R[b_i, 1 - b + b_i](mu_i) <= C <= sum_i R[b - b_i, 1 - b_i](mu_i).
JmBounds jm_center_bounds(const JmBoundsInput& input);

struct CmBounds {
  double a_star = 0.0;  // sup over alpha of R[alpha, 1 - (n-1) alpha]
  double b_star = 0.0;  // inf over alpha of R[(n-1) alpha, 1 - alpha]
  double alpha_a = 0.0;
  double alpha_b = 0.0;
  std::string method;
  double grid_resolution = 0.0;  // ratio between consecutive alpha grid points

  CenterInterval interval(int n) const;
};

/// Per-variable center bounds for n-complete mixability. Laws with a declared
/// +inf (-inf) mean report a_star = +inf (b_star = -inf).
CmBounds cm_bounds(const Distribution& mu, int n);

/// R[(n-1) alpha, 1 - alpha] of the standard Cauchy in closed form.
double cauchy_R_closed_form(int n, double alpha);

/// [-log(n-1)/pi, log(n-1)/pi].
CenterInterval cauchy_center_interval(int n);

/// alpha <= 1 - (y - x) / (n (q - x)), with 1e-12 slack on the boundary.
bool mean_inequality_check(double alpha, double x, double y, double q, int n);

struct DualBound {
  double value = 0.0;
  double t_argmin = 0.0;
  double grid_resolution = 0.0;  // ratio between consecutive (c - t) grid points
  int evaluations = 0;
};

/// inf over t < c of int_t^{nc - (n-1) t} P(X > x) dx / (c - t), evaluated on
/// a log grid in c - t with golden-section refinement of the best bracket.
DualBound dual_bound(const Distribution& mu, int n, double c);

enum class MeanVerdict { excluded, inconclusive };
std::string to_string(MeanVerdict v);

/// "excluded" when the declared means force the sum to be infinite: some
/// marginal has an infinite mean and none has an undefined mean or an infinite
/// mean of the opposite sign.
MeanVerdict infinite_mean_classifier(const std::vector<DistributionPtr>& marginals);

}  // namespace mixcenter
