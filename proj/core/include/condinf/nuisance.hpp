#ifndef CONDINF_NUISANCE_HPP
#define CONDINF_NUISANCE_HPP

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "condinf/families.hpp"
#include "condinf/interval.hpp"
#include "condinf/rng.hpp"

namespace condinf {

// One (x, y) observation of the normal-parabola model.
struct PairObs {
  double x;
  double y;
};

// Newton-Raphson on a scalar score with step halving whenever the proposed
// iterate leaves the parameter space or lowers the objective. Damping acts on
// the step size only; the basin is decided entirely by the start point.
struct NewtonScoreProblem {
  std::function<double(double)> score;
  std::function<double(double)> score_deriv;
  std::function<double(double)> objective;
  std::function<bool(double)> in_space;
  double score_tol;
};
double damped_newton(const NewtonScoreProblem& problem, double start, int max_iter = 100);

// Canonical two-parameter exponential family exp[θ·t(x) + η·u(x) - K(θ,η)]h(x)
// in natural coordinates, oriented so theta is the interest parameter and eta
// the nuisance. u is the statistic sufficient for the nuisance at fixed theta.
class TwoParamExpFamily {
 public:
  virtual ~TwoParamExpFamily() = default;
  virtual std::string name() const = 0;
  virtual double interest_stat(double x) const = 0;  // t(x)
  virtual double nuisance_stat(double x) const = 0;  // u(x)
  virtual Interval nuisance_space(double theta) const = 0;
  virtual double log_likelihood(double theta, double eta,
                                std::span<const double> data) const = 0;
  virtual double nuisance_score(double theta, double eta,
                                std::span<const double> data) const = 0;
  virtual double nuisance_score_deriv(double theta, double eta,
                                      std::span<const double> data) const = 0;
  virtual double sample(double theta, double eta, Rng& rng) const = 0;
  // The member at (theta, eta) carrying the nuisance statistic, for chains.
  virtual std::unique_ptr<TiltableFamily> conditional_family(double theta,
                                                             double eta) const = 0;
};

// Gamma(shape a, scale b), interest = shape, nuisance = scale. The scale is
// eliminated by conditioning on the plain sum.
class GammaShapeModel final : public TwoParamExpFamily {
 public:
  std::string name() const override { return "gamma[interest=shape]"; }
  double interest_stat(double x) const override;  // log x
  double nuisance_stat(double x) const override { return x; }
  Interval nuisance_space(double) const override { return Interval::positive(); }
  double log_likelihood(double a, double b, std::span<const double> data) const override;
  double nuisance_score(double a, double b, std::span<const double> data) const override;
  double nuisance_score_deriv(double a, double b,
                              std::span<const double> data) const override;
  double sample(double a, double b, Rng& rng) const override;
  std::unique_ptr<TiltableFamily> conditional_family(double a, double b) const override;
};

// Gamma(shape a, scale b), interest = scale, nuisance = shape. The shape is
// eliminated by conditioning on the sum of logs.
class GammaScaleModel final : public TwoParamExpFamily {
 public:
  std::string name() const override { return "gamma[interest=scale]"; }
  double interest_stat(double x) const override { return x; }
  double nuisance_stat(double x) const override;  // log x
  Interval nuisance_space(double) const override { return Interval::positive(); }
  double log_likelihood(double b, double a, std::span<const double> data) const override;
  double nuisance_score(double b, double a, std::span<const double> data) const override;
  double nuisance_score_deriv(double b, double a,
                              std::span<const double> data) const override;
  double sample(double b, double a, Rng& rng) const override;
  std::unique_ptr<TiltableFamily> conditional_family(double b, double a) const override;
};

// Two independent Gaussians with common variance and means (psi, psi²): the
// curved (2,1) family whose psi-likelihood is bimodal. Interest is the
// variance, nuisance the mean parameter psi.
struct NormalParabola {
  double psi;
  double sigma2;

  PairObs sample(Rng& rng) const;

  // psi-score of the likelihood at fixed variance, in sample-mean form:
  // (x̄ - psi) + 2 psi (ȳ - psi²). The variance cancels.
  static double psi_score(double psi, std::span<const PairObs> data);
  static double psi_score_deriv(double psi, std::span<const PairObs> data);
  static double log_likelihood(double psi, double sigma2, std::span<const PairObs> data);
};

// MLE of the nuisance with the interest parameter held at theta0, found by
// damped Newton-Raphson from nr_start. The start point is an explicit
// argument: with a bimodal likelihood the limit depends on it, and that
// dependence is the object of study. Throws NewtonDiverged.
double mle_nuisance(const TwoParamExpFamily& model, double theta0,
                    std::span<const double> data, double nr_start);
double mle_nuisance(const NormalParabola& model, double sigma2_0,
                    std::span<const PairObs> data, double nr_start);

}  // namespace condinf

#endif
