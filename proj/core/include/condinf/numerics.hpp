#ifndef CONDINF_NUMERICS_HPP
#define CONDINF_NUMERICS_HPP

#include <functional>

#include "condinf/interval.hpp"

namespace condinf {

// Bracket for scalar root finding. The target function must change sign (or
// be monotone with a sign change) on [lo, hi].
struct Bracket {
  double lo;
  double hi;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  long evaluations = 0;
  bool converged = true;  // false means ToleranceNotReached; value is best estimate
};

using ScalarFn = std::function<double(double)>;

// Safeguarded Newton on a monotone function: Newton steps (derivative optional,
// secant otherwise) clipped to the current sign-change bracket, bisection when
// a step leaves it. Throws NoSignChange / MaxIterations.
double find_root_monotone(const ScalarFn& f, Bracket bracket, double rel_tol,
                          const ScalarFn& dfdt = {}, int max_iter = 200);

// Adaptive Gauss-Kronrod (G7,K15) bisection. Half-infinite and infinite
// supports are mapped to bounded intervals by x = lo + u/(1-u) and its mirror.
// Throws NonFinite if the integrand evaluates to NaN/Inf.
QuadratureResult integrate_adaptive(const ScalarFn& f, Interval support,
                                    double rel_tol = 1e-8);

// Central finite differences of order 1, 2 or 3 with steps scaled to machine
// precision per order. Cross-check oracle for analytic cumulants, not a
// production derivative.
double differentiate(const ScalarFn& f, double t, int order);

}  // namespace condinf

#endif
