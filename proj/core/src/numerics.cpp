#include "condinf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "condinf/errors.hpp"

namespace condinf {

namespace {

bool finite(double x) { return std::isfinite(x); }

// G7,K15 nodes/weights on [-1,1] (QUADPACK dqk15).
constexpr double kKronrodNodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0000000000000000};
constexpr double kKronrodWeights[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
constexpr double kGaussWeights[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct PanelEstimate {
  double kronrod;
  double error;
};

PanelEstimate gauss_kronrod(const ScalarFn& f, double a, double b, long& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fv[15];
  for (int j = 0; j < 7; ++j) {
    fv[j] = f(center - half * kKronrodNodes[j]);
    fv[14 - j] = f(center + half * kKronrodNodes[j]);
  }
  fv[7] = f(center);
  evals += 15;
  for (double v : fv)
    if (!finite(v)) throw NonFinite("integrand returned NaN/Inf");

  double kronrod = 0.0, gauss = 0.0;
  for (int j = 0; j < 7; ++j) kronrod += kKronrodWeights[j] * (fv[j] + fv[14 - j]);
  kronrod += kKronrodWeights[7] * fv[7];
  for (int j = 0; j < 3; ++j) gauss += kGaussWeights[j] * (fv[2 * j + 1] + fv[13 - 2 * j]);
  gauss += kGaussWeights[3] * fv[7];

  kronrod *= half;
  gauss *= half;
  return {kronrod, std::abs(kronrod - gauss)};
}

// Map a possibly unbounded support onto a bounded (a,b) via a monotone change
// of variable; returns the transformed integrand.
struct MappedIntegrand {
  ScalarFn g;
  double a;
  double b;
};

MappedIntegrand map_support(const ScalarFn& f, Interval s) {
  if (s.finite_lo() && s.finite_hi()) return {f, s.lo, s.hi};
  if (s.finite_lo()) {
    // x = lo + u/(1-u), dx = du/(1-u)^2, u in (0,1)
    const double lo = s.lo;
    return {[f, lo](double u) {
              const double w = 1.0 - u;
              return f(lo + u / w) / (w * w);
            },
            0.0, 1.0};
  }
  if (s.finite_hi()) {
    const double hi = s.hi;
    return {[f, hi](double u) {
              const double w = 1.0 - u;
              return f(hi - u / w) / (w * w);
            },
            0.0, 1.0};
  }
  // x = u/(1-u^2) covers the whole line, u in (-1,1)
  return {[f](double u) {
            const double w = 1.0 - u * u;
            return f(u / w) * (1.0 + u * u) / (w * w);
          },
          -1.0, 1.0};
}

}  // namespace

double find_root_monotone(const ScalarFn& f, Bracket bracket, double rel_tol,
                          const ScalarFn& dfdt, int max_iter) {
  double lo = bracket.lo, hi = bracket.hi;
  if (!(lo < hi)) throw NoSignChange("invalid bracket: lo >= hi");
  double flo = f(lo), fhi = f(hi);
  if (!finite(flo) || !finite(fhi)) throw NonFinite("f not finite at bracket endpoints");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw NoSignChange("no sign change on bracket");

  const double fscale = std::max(std::abs(flo), std::abs(fhi));
  double t = 0.5 * (lo + hi);
  double ft = f(t);
  double t_prev = lo, f_prev = flo;

  for (int it = 0; it < max_iter; ++it) {
    if (!finite(ft)) throw NonFinite("f not finite inside bracket");
    if (std::abs(ft) <= rel_tol * fscale) return t;

    // shrink the bracket around the sign change
    if ((ft > 0.0) == (fhi > 0.0)) {
      hi = t;
      fhi = ft;
    } else {
      lo = t;
      flo = ft;
    }
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(t))) return 0.5 * (lo + hi);

    // Newton with the supplied derivative, else a secant on the last two
    // iterates; out-of-bracket steps and every third iteration bisect
    double next = 0.5 * (lo + hi);
    if (it % 3 != 2) {
      const double deriv = dfdt ? dfdt(t) : (t != t_prev ? (ft - f_prev) / (t - t_prev)
                                                         : 0.0);
      if (finite(deriv) && deriv != 0.0) {
        const double candidate = t - ft / deriv;
        if (candidate > lo && candidate < hi) next = candidate;
      }
    }
    t_prev = t;
    f_prev = ft;
    t = next;
    ft = f(t);
  }
  throw MaxIterations("find_root_monotone: iteration cap reached");
}

QuadratureResult integrate_adaptive(const ScalarFn& f, Interval support,
                                    double rel_tol) {
  const MappedIntegrand m = map_support(f, support);

  struct Panel {
    double a, b, value, error;
  };

  QuadratureResult out;
  auto first = gauss_kronrod(m.g, m.a, m.b, out.evaluations);
  std::vector<Panel> panels{{m.a, m.b, first.kronrod, first.error}};

  constexpr int kMaxPanels = 2000;
  for (int round = 0; round < kMaxPanels; ++round) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].value;
      err += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    const double target = rel_tol * std::max(std::abs(total), 1e-300);
    if (err <= target || panels[worst].error == 0.0) {
      out.value = total;
      out.abs_error_estimate = err;
      out.converged = true;
      return out;
    }
    if (static_cast<int>(panels.size()) >= kMaxPanels) break;

    const Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    if (mid <= p.a || mid >= p.b) break;  // panel no longer splittable
    auto left = gauss_kronrod(m.g, p.a, mid, out.evaluations);
    auto right = gauss_kronrod(m.g, mid, p.b, out.evaluations);
    panels[worst] = {p.a, mid, left.kronrod, left.error};
    panels.push_back({mid, p.b, right.kronrod, right.error});
  }

  double total = 0.0, err = 0.0;
  for (const auto& p : panels) {
    total += p.value;
    err += p.error;
  }
  out.value = total;
  out.abs_error_estimate = err;
  out.converged = false;
  return out;
}

namespace {
double central_second(const ScalarFn& f, double t, double h) {
  return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
}
double central_third(const ScalarFn& f, double t, double h) {
  return (f(t + 2.0 * h) - 2.0 * f(t + h) + 2.0 * f(t - h) - f(t - 2.0 * h)) /
         (2.0 * h * h * h);
}
}  // namespace

double differentiate(const ScalarFn& f, double t, int order) {
  const double eps = 2.220446049250313e-16;
  const double scale = 1.0 + std::abs(t);
  double value;
  switch (order) {
    case 1: {
      const double h = std::cbrt(eps) * scale;
      value = (f(t + h) - f(t - h)) / (2.0 * h);
      break;
    }
    case 2: {
      // one Richardson step cancels the h² truncation term
      const double h = std::pow(eps, 0.25) * scale;
      value = (4.0 * central_second(f, t, 0.5 * h) - central_second(f, t, h)) / 3.0;
      break;
    }
    case 3: {
      const double h = std::pow(eps, 0.2) * scale;
      value = (4.0 * central_third(f, t, 0.5 * h) - central_third(f, t, h)) / 3.0;
      break;
    }
    default:
      throw OutOfDomain("differentiate: order must be 1, 2 or 3");
  }
  if (!finite(value)) throw NonFinite("differentiate: evaluation failed");
  return value;
}

}  // namespace condinf
