#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "condinf/errors.hpp"
#include "condinf/families.hpp"
#include "condinf/numerics.hpp"
#include "condinf/rng.hpp"

using namespace condinf;

namespace {

std::vector<std::unique_ptr<TiltableFamily>> builtin_families() {
  std::vector<std::unique_ptr<TiltableFamily>> out;
  out.push_back(std::make_unique<Exponential>(1.0));
  out.push_back(std::make_unique<GammaSum>(2.0, 1.0));
  out.push_back(std::make_unique<GammaLogSum>(2.0, 1.0));
  out.push_back(std::make_unique<Normal>(0.7, 1.3));
  out.push_back(std::make_unique<InverseGaussianSum>(1.0, 1.0));
  out.push_back(std::make_unique<InverseGaussianReciprocal>(1.0, 1.0));
  return out;
}

// safe interior tilt window per family, clear of the MGF domain boundary
struct TiltWindow {
  double lo, hi;
};
TiltWindow tilt_window(const TiltableFamily& f) {
  const Interval d = f.mgf_domain();
  const double lo = d.finite_lo() ? d.lo + 0.3 : -3.0;
  const double hi = d.finite_hi() ? d.hi - 0.1 * std::max(1.0, std::abs(d.hi)) : 3.0;
  return {lo, hi};
}

double quadrature_mean_of_u(const TiltableFamily& f) {
  auto numer = integrate_adaptive(
      [&](double x) { return f.statistic(x) * std::exp(f.log_density(x)); }, f.support(),
      1e-10);
  auto denom = integrate_adaptive([&](double x) { return std::exp(f.log_density(x)); },
                                  f.support(), 1e-10);
  return numer.value / denom.value;
}

}  // namespace

TEST_CASE("tilting the unit exponential to mean 2 halves the rate") {
  const Exponential base(1.0);
  CHECK(base.tilt_solve(2.0) == doctest::Approx(0.5).epsilon(1e-12));

  const auto tilted = tilt(base, 2.0);
  const Exponential reference(0.5);
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0})
    CHECK(tilted->log_density(x) ==
          doctest::Approx(reference.log_density(x)).epsilon(1e-12));

  auto mass = integrate_adaptive([&](double x) { return std::exp(tilted->log_density(x)); },
                                 tilted->support(), 1e-10);
  CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(quadrature_mean_of_u(*tilted) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("identity tilt returns the base family") {
  for (const auto& f : builtin_families()) {
    CAPTURE(f->name());
    const double alpha = f->cumulants(0.0).mean;
    CHECK(f->tilt_solve(alpha) == doctest::Approx(0.0).epsilon(1e-9));
    const auto tilted = tilt(*f, alpha);
    for (double q : {0.2, 0.9, 1.7})
      CHECK(tilted->log_density(q) == doctest::Approx(f->log_density(q)).epsilon(1e-9));
  }
}

TEST_CASE("tilting a gamma rescales") {
  const GammaSum base(2.0, 1.0);
  CHECK(base.tilt_solve(4.0) == doctest::Approx(0.5).epsilon(1e-12));
  const auto tilted = tilt(base, 4.0);
  const GammaSum reference(2.0, 2.0);
  for (double x : {0.5, 2.0, 7.0})
    CHECK(tilted->log_density(x) ==
          doctest::Approx(reference.log_density(x)).epsilon(1e-12));
  CHECK(quadrature_mean_of_u(*tilted) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("cumulant values at distinguished points") {
  const Normal normal(0.7, 1.3);
  for (double t : {-1.0, 0.0, 2.5}) {
    const Cumulants c = normal.cumulants(t);
    CHECK(c.mean == doctest::Approx(0.7 + 1.3 * t));
    CHECK(c.variance == doctest::Approx(1.3));
    CHECK(c.third == 0.0);
  }

  const Cumulants e = Exponential(1.0).cumulants(0.0);
  CHECK(e.mean == doctest::Approx(1.0));
  CHECK(e.variance == doctest::Approx(1.0));
  CHECK(e.third == doctest::Approx(2.0));

  const Cumulants g = GammaSum(2.0, 1.0).cumulants(0.0);
  CHECK(g.mean == doctest::Approx(2.0));
  CHECK(g.variance == doctest::Approx(2.0));
  CHECK(g.third == doctest::Approx(4.0));

  // known closed-form moments of 1/X for IG(1,1): mean 2, variance 3
  const Cumulants r = InverseGaussianReciprocal(1.0, 1.0).cumulants(0.0);
  CHECK(r.mean == doctest::Approx(2.0));
  CHECK(r.variance == doctest::Approx(3.0));

  CHECK_THROWS_AS(cumulants_at(Exponential(1.0), 1.0), OutOfDomain);
}

TEST_CASE("analytic cumulants match finite differences of the log-MGF") {
  Rng rng(2024);
  for (const auto& f : builtin_families()) {
    CAPTURE(f->name());
    const TiltWindow w = tilt_window(*f);
    auto logmgf = [&](double t) { return f->log_mgf(t); };
    for (int j = 0; j < 20; ++j) {
      const double t = rng.uniform(w.lo, w.hi);
      const Cumulants c = f->cumulants(t);
      // scale floors: sd for the mean, skewness scale s³ for the (possibly
      // vanishing) third cumulant
      const double sd = std::sqrt(c.variance);
      CHECK(std::abs(differentiate(logmgf, t, 1) - c.mean) <=
            1e-4 * std::max(std::abs(c.mean), sd));
      CHECK(std::abs(differentiate(logmgf, t, 2) - c.variance) <= 1e-4 * c.variance);
      CHECK(std::abs(differentiate(logmgf, t, 3) - c.third) <=
            1e-4 * std::max(std::abs(c.third), sd * sd * sd));
    }
  }
}

TEST_CASE("tilt recenters the statistic mean (and solve inverts m)") {
  Rng rng(99);
  for (const auto& f : builtin_families()) {
    CAPTURE(f->name());
    const TiltWindow w = tilt_window(*f);
    for (int j = 0; j < 20; ++j) {
      // draw the target through m itself so it is always attainable
      const double alpha = f->cumulants(rng.uniform(w.lo, w.hi)).mean;
      const double t = f->tilt_solve(alpha);
      CHECK(std::abs(f->cumulants(t).mean - alpha) <= 1e-9 * std::abs(alpha));

      const auto tilted = f->tilted(t);
      auto numer = integrate_adaptive(
          [&](double x) { return f->statistic(x) * std::exp(tilted->log_density(x)); },
          f->support(), 1e-10);
      CHECK(numer.value == doctest::Approx(alpha).epsilon(1e-6));
    }
  }
}

TEST_CASE("generic root-driven tilt agrees with the closed forms") {
  for (const auto& f : builtin_families()) {
    CAPTURE(f->name());
    const TiltWindow w = tilt_window(*f);
    const double alpha = f->cumulants(0.5 * (w.lo + w.hi)).mean;
    const double closed = f->tilt_solve(alpha);
    const double generic = f->TiltableFamily::tilt_solve(alpha);
    CHECK(generic == doctest::Approx(closed).epsilon(1e-8));
  }
}

TEST_CASE("generic tilted wrapper matches closed-form members") {
  const GammaSum base(2.0, 1.0);
  const double t = base.tilt_solve(4.0);
  const GenericTilted generic(base.clone(), t);
  const auto closed = base.tilted(t);
  for (double x : {0.3, 1.0, 4.0, 9.0})
    CHECK(generic.log_density(x) == doctest::Approx(closed->log_density(x)).epsilon(1e-12));
  const Cumulants cg = generic.cumulants(0.0);
  const Cumulants cc = closed->cumulants(0.0);
  CHECK(cg.mean == doctest::Approx(cc.mean).epsilon(1e-12));
  CHECK(cg.variance == doctest::Approx(cc.variance).epsilon(1e-12));
}

TEST_CASE("base samplers reproduce the family means") {
  Rng rng(7);
  const int n = 100000;

  double s = 0.0;
  const Exponential e(1.0);
  for (int i = 0; i < n; ++i) s += e.base_sample(rng);
  CHECK(s / n == doctest::Approx(1.0).epsilon(0.02));

  s = 0.0;
  const GammaSum g(2.0, 1.0);
  for (int i = 0; i < n; ++i) s += g.base_sample(rng);
  CHECK(s / n == doctest::Approx(2.0).epsilon(0.015));

  s = 0.0;
  const InverseGaussianSum ig(1.0, 1.0);
  for (int i = 0; i < n; ++i) s += ig.base_sample(rng);
  CHECK(s / n == doctest::Approx(1.0).epsilon(0.03));

  // reciprocal moment of IG(1,1) is 1/mu + 1/lambda = 2
  s = 0.0;
  const InverseGaussianReciprocal igr(1.0, 1.0);
  for (int i = 0; i < n; ++i) s += igr.statistic(igr.base_sample(rng));
  CHECK(s / n == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("alpha outside the statistic mean range is rejected") {
  CHECK_THROWS_AS(tilt(Exponential(1.0), -1.0), AlphaOutOfRange);
  CHECK_THROWS_AS(tilt(GammaSum(2.0, 1.0), 0.0), AlphaOutOfRange);
  CHECK_THROWS_AS(tilt(InverseGaussianReciprocal(1.0, 1.0), -0.2), AlphaOutOfRange);
}

TEST_CASE("statistic pairings of the two-statistic families") {
  CHECK(GammaSum(2.0, 1.0).statistic(3.0) == 3.0);
  CHECK(GammaLogSum(2.0, 1.0).statistic(3.0) == doctest::Approx(std::log(3.0)));
  CHECK(InverseGaussianSum(1.0, 1.0).statistic(4.0) == 4.0);
  CHECK(InverseGaussianReciprocal(1.0, 1.0).statistic(4.0) == doctest::Approx(0.25));
}

TEST_CASE("family factory") {
  const auto f = make_family("gamma", "sum_log", {{"shape", 2.0}, {"scale", 1.5}});
  CHECK(f->name() == "gamma[u=log x]");
  CHECK_THROWS_AS(make_family("gamma", "sum_reciprocal", {{"shape", 2.0}, {"scale", 1.0}}),
                  ConfigError);
  CHECK_THROWS_AS(make_family("gamma", "sum", {{"shape", 2.0}}), ConfigError);
}
