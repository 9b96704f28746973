#pragma once

#include <functional>

namespace mixcenter::numerics {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = false;
};

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

using Fn = std::function<double(double)>;

/// Globally adaptive 21-point Gauss-Kronrod quadrature on [a, b]; the interval
/// with the largest error estimate is bisected until the total estimate
/// drops below max(abs_tol, rel_tol * |I|).
QuadResult integrate(const Fn& f, double a, double b, const QuadOptions& opt = {});

/// As integrate() but throws NumericError when the tolerance is not reached.
double integrate_checked(const Fn& f, double a, double b, const QuadOptions& opt = {});

/// Brent's method on a bracketing interval. fa and fb must have opposite signs
/// (or one of them be zero). Stops when the bracket is narrower than
/// xtol + 4 eps |x|.
double brent_root(const Fn& f, double a, double b, double fa, double fb,
                  double xtol = 0.0, int max_iter = 200);

struct MinResult {
  double x = 0.0;
  double fx = 0.0;
};

/// Golden-section search for a minimum of a unimodal function on [a, b].
MinResult golden_min(const Fn& f, double a, double b, double xtol, int max_iter = 300);

}  // namespace mixcenter::numerics
