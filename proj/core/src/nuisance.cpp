#include "condinf/nuisance.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <numeric>

#include "condinf/errors.hpp"

namespace condinf {

namespace {
double mean_log(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::log(x);
  return s / static_cast<double>(v.size());
}
}  // namespace

double damped_newton(const NewtonScoreProblem& p, double start, int max_iter) {
  if (!p.in_space(start)) throw NewtonDiverged("start outside parameter space");
  double eta = start;
  double obj = p.objective(eta);

  for (int it = 0; it < max_iter; ++it) {
    const double s = p.score(eta);
    if (!std::isfinite(s)) throw NewtonDiverged("score not finite");
    if (std::abs(s) <= p.score_tol) return eta;

    const double d = p.score_deriv(eta);
    if (!std::isfinite(d) || d == 0.0) throw NewtonDiverged("score derivative degenerate");

    double step = -s / d;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      const double candidate = eta + step;
      if (p.in_space(candidate)) {
        const double cobj = p.objective(candidate);
        if (std::isfinite(cobj) && cobj >= obj - 1e-12 * (1.0 + std::abs(obj))) {
          eta = candidate;
          obj = cobj;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) throw NewtonDiverged("step rejected after 60 halvings");
  }
  throw NewtonDiverged("exceeded iteration cap");
}

// ---------------------------------------------------------------------------
// Gamma, interest = shape

double GammaShapeModel::interest_stat(double x) const { return std::log(x); }

double GammaShapeModel::log_likelihood(double a, double b,
                                       std::span<const double> data) const {
  const double n = static_cast<double>(data.size());
  double sum_log = 0.0, sum = 0.0;
  for (double x : data) {
    sum_log += std::log(x);
    sum += x;
  }
  return (a - 1.0) * sum_log - sum / b - n * (a * std::log(b) + std::lgamma(a));
}

double GammaShapeModel::nuisance_score(double a, double b,
                                       std::span<const double> data) const {
  const double n = static_cast<double>(data.size());
  double sum = std::accumulate(data.begin(), data.end(), 0.0);
  return sum / (b * b) - n * a / b;
}

double GammaShapeModel::nuisance_score_deriv(double a, double b,
                                             std::span<const double> data) const {
  const double n = static_cast<double>(data.size());
  double sum = std::accumulate(data.begin(), data.end(), 0.0);
  return -2.0 * sum / (b * b * b) + n * a / (b * b);
}

double GammaShapeModel::sample(double a, double b, Rng& rng) const {
  return rng.gamma(a, b);
}

std::unique_ptr<TiltableFamily> GammaShapeModel::conditional_family(double a,
                                                                    double b) const {
  return std::make_unique<GammaSum>(a, b);
}

// ---------------------------------------------------------------------------
// Gamma, interest = scale

double GammaScaleModel::nuisance_stat(double x) const { return std::log(x); }

double GammaScaleModel::log_likelihood(double b, double a,
                                       std::span<const double> data) const {
  GammaShapeModel flipped;
  return flipped.log_likelihood(a, b, data);
}

double GammaScaleModel::nuisance_score(double b, double a,
                                       std::span<const double> data) const {
  const double n = static_cast<double>(data.size());
  return n * (mean_log(data) - boost::math::digamma(a) - std::log(b));
}

double GammaScaleModel::nuisance_score_deriv(double b, double a,
                                             std::span<const double> data) const {
  const double n = static_cast<double>(data.size());
  (void)b;
  return -n * boost::math::trigamma(a);
}

double GammaScaleModel::sample(double b, double a, Rng& rng) const {
  return rng.gamma(a, b);
}

std::unique_ptr<TiltableFamily> GammaScaleModel::conditional_family(double b,
                                                                    double a) const {
  return std::make_unique<GammaLogSum>(a, b);
}

// ---------------------------------------------------------------------------
// Normal parabola

PairObs NormalParabola::sample(Rng& rng) const {
  const double sd = std::sqrt(sigma2);
  return {psi + sd * rng.normal(), psi * psi + sd * rng.normal()};
}

double NormalParabola::psi_score(double psi, std::span<const PairObs> data) {
  double xbar = 0.0, ybar = 0.0;
  for (const auto& o : data) {
    xbar += o.x;
    ybar += o.y;
  }
  xbar /= static_cast<double>(data.size());
  ybar /= static_cast<double>(data.size());
  return (xbar - psi) + 2.0 * psi * (ybar - psi * psi);
}

double NormalParabola::psi_score_deriv(double psi, std::span<const PairObs> data) {
  double ybar = 0.0;
  for (const auto& o : data) ybar += o.y;
  ybar /= static_cast<double>(data.size());
  return -1.0 + 2.0 * ybar - 6.0 * psi * psi;
}

double NormalParabola::log_likelihood(double psi, double sigma2,
                                      std::span<const PairObs> data) {
  constexpr double kLogTwoPi = 1.8378770664093453;
  const double n = static_cast<double>(data.size());
  double rss = 0.0;
  const double p2 = psi * psi;
  for (const auto& o : data) {
    rss += (o.x - psi) * (o.x - psi) + (o.y - p2) * (o.y - p2);
  }
  return -n * (kLogTwoPi + std::log(sigma2)) - rss / (2.0 * sigma2);
}

// ---------------------------------------------------------------------------
// nuisance MLE

double mle_nuisance(const TwoParamExpFamily& model, double theta0,
                    std::span<const double> data, double nr_start) {
  if (data.empty()) throw NuisanceMleFailed("empty dataset");
  const double n = static_cast<double>(data.size());
  NewtonScoreProblem p{
      [&](double eta) { return model.nuisance_score(theta0, eta, data); },
      [&](double eta) { return model.nuisance_score_deriv(theta0, eta, data); },
      [&](double eta) { return model.log_likelihood(theta0, eta, data); },
      [&](double eta) { return model.nuisance_space(theta0).contains(eta); },
      1e-10 * n};
  try {
    return damped_newton(p, nr_start);
  } catch (const NewtonDiverged& e) {
    throw NuisanceMleFailed(model.name() + ": " + e.what());
  }
}

double mle_nuisance(const NormalParabola& /*model*/, double sigma2_0,
                    std::span<const PairObs> data, double nr_start) {
  if (data.empty()) throw NuisanceMleFailed("empty dataset");
  NewtonScoreProblem p{
      [&](double psi) { return NormalParabola::psi_score(psi, data); },
      [&](double psi) { return NormalParabola::psi_score_deriv(psi, data); },
      [&](double psi) { return NormalParabola::log_likelihood(psi, sigma2_0, data); },
      [](double psi) { return std::isfinite(psi); },
      1e-12};
  try {
    return damped_newton(p, nr_start);
  } catch (const NewtonDiverged& e) {
    throw NuisanceMleFailed(std::string("normal_parabola: ") + e.what());
  }
}

}  // namespace condinf
