#include <doctest.h>

#include <cmath>
#include <vector>

#include "condinf/errors.hpp"
#include "condinf/nuisance.hpp"
#include "condinf/rng.hpp"

using namespace condinf;

namespace {

std::vector<PairObs> parabola_sample(double psi, double sigma2, std::size_t n,
                                     std::uint64_t seed) {
  Rng rng(seed);
  const NormalParabola model{psi, sigma2};
  std::vector<PairObs> data(n);
  for (auto& o : data) o = model.sample(rng);
  return data;
}

// all roots of the psi-score by sign-change scan + bisection (test oracle)
std::vector<double> score_roots(std::span<const PairObs> data) {
  std::vector<double> roots;
  const int grid = 4000;
  double prev_psi = -10.0, prev = NormalParabola::psi_score(prev_psi, data);
  for (int i = 1; i <= grid; ++i) {
    const double psi = -10.0 + 20.0 * i / grid;
    const double val = NormalParabola::psi_score(psi, data);
    if (prev == 0.0) roots.push_back(prev_psi);
    if (prev * val < 0.0) {
      double lo = prev_psi, hi = psi;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (NormalParabola::psi_score(lo, data) *
                NormalParabola::psi_score(mid, data) <=
            0.0)
          hi = mid;
        else
          lo = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_psi = psi;
    prev = val;
  }
  return roots;
}

}  // namespace

TEST_CASE("gamma scale MLE with the shape fixed") {
  // sample mean exactly 3 => b-hat = mean/a0 = 2 at a0 = 1.5
  const std::vector<double> data = {1.0, 2.0, 3.0, 4.0, 5.0};
  const GammaShapeModel model;
  const double bhat = mle_nuisance(model, 1.5, data, 1.0);
  CHECK(bhat == doctest::Approx(2.0).epsilon(1e-9));

  // independent oracle: grid maximization of the likelihood in b
  double best_b = 0.0, best = -1e300;
  for (double b = 1.0; b <= 3.0; b += 1e-4) {
    const double ll = model.log_likelihood(1.5, b, data);
    if (ll > best) {
      best = ll;
      best_b = b;
    }
  }
  CHECK(bhat == doctest::Approx(best_b).epsilon(1e-3));

  // stationarity
  const double n = static_cast<double>(data.size());
  CHECK(std::abs(model.nuisance_score(1.5, bhat, data)) <= 1e-8 * n);
}

TEST_CASE("gamma shape MLE with the scale fixed") {
  Rng rng(31);
  std::vector<double> data(200);
  for (auto& v : data) v = rng.gamma(2.0, 1.5);
  const GammaScaleModel model;
  const double ahat = mle_nuisance(model, 1.5, data, 1.0);
  CHECK(ahat == doctest::Approx(2.0).epsilon(0.2));
  CHECK(std::abs(model.nuisance_score(1.5, ahat, data)) <=
        1e-8 * static_cast<double>(data.size()));
}

TEST_CASE("parabola score has at least two real roots under psi_T = 2") {
  const auto data = parabola_sample(2.0, 1.0, 100, 11);
  const auto roots = score_roots(data);
  CHECK(roots.size() >= 2);
}

TEST_CASE("Newton-Raphson limit depends on the start point") {
  const auto data = parabola_sample(2.0, 1.0, 100, 12);
  const auto roots = score_roots(data);
  REQUIRE(roots.size() == 3);  // true mode, spurious mode, and the dip between

  const NormalParabola model{2.0, 1.0};
  const double from_good = mle_nuisance(model, 1.0, data, 1.5);
  CHECK(from_good == doctest::Approx(roots.back()).epsilon(1e-8));
  CHECK(from_good == doctest::Approx(2.0).epsilon(0.1));

  const double from_bad = mle_nuisance(model, 1.0, data, -1.5);
  CHECK(from_bad == doctest::Approx(roots.front()).epsilon(1e-8));
  CHECK(from_bad < -1.0);  // the spurious maximizer, near -2

  // both are stationary points of the psi-likelihood
  CHECK(std::abs(NormalParabola::psi_score(from_good, data)) <= 1e-10);
  CHECK(std::abs(NormalParabola::psi_score(from_bad, data)) <= 1e-10);
}

TEST_CASE("damping never changes the basin, only the step size") {
  // start in the basin of the likelihood dip: Newton aims at the local
  // minimum, every step lowers the likelihood, and the fit reports divergence
  const auto data = parabola_sample(2.0, 1.0, 100, 13);
  const auto roots = score_roots(data);
  REQUIRE(roots.size() == 3);
  const double dip = roots[1];
  const NormalParabola model{2.0, 1.0};
  CHECK_THROWS_AS(mle_nuisance(model, 1.0, data, dip + 0.02), NuisanceMleFailed);
}

TEST_CASE("empty data is rejected") {
  const GammaShapeModel model;
  CHECK_THROWS_AS(mle_nuisance(model, 1.0, std::span<const double>{}, 1.0),
                  NuisanceMleFailed);
}
