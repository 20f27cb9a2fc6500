#ifndef CONDINF_INTERVAL_HPP
#define CONDINF_INTERVAL_HPP

#include <limits>

namespace condinf {

// Open interval (lo, hi), half-infinite or infinite endpoints allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x > lo && x < hi; }
  bool finite_lo() const { return lo > -std::numeric_limits<double>::infinity(); }
  bool finite_hi() const { return hi < std::numeric_limits<double>::infinity(); }

  static Interval positive() { return {0.0, std::numeric_limits<double>::infinity()}; }
  static Interval real_line() { return {}; }
};

}  // namespace condinf

#endif
