#ifndef CONDINF_FAMILIES_HPP
#define CONDINF_FAMILIES_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "condinf/interval.hpp"
#include "condinf/rng.hpp"

namespace condinf {

// First three derivatives of the statistic's log-MGF at a tilt point.
struct Cumulants {
  double mean;      // m(t)  = K'(t)
  double variance;  // s²(t) = K''(t), positive on the domain interior
  double third;     // μ3(t) = K'''(t)
};

// Exact Gaussian form of a chain step, available when the density times the
// Gaussian factor completes the square (u(x) = x under a normal family). The
// location parameter cancels algebraically, so these values never depend on it.
struct GaussStep {
  double mean;
  double variance;
};

// A one-dimensional density p_X with statistic u(X) satisfying the Cramér
// condition: finite MGF of U = u(X) on a neighbourhood of 0, with computable
// cumulant derivatives and a steep mean function m(t).
class TiltableFamily {
 public:
  virtual ~TiltableFamily() = default;

  virtual std::string name() const = 0;
  virtual double log_density(double x) const = 0;
  virtual double statistic(double x) const = 0;  // u(x)
  virtual Interval support() const = 0;
  virtual Interval mgf_domain() const = 0;       // open t-domain of K_U
  virtual double log_mgf(double t) const = 0;    // K_U(t), K_U(0) = 0
  virtual Cumulants cumulants(double t) const = 0;
  virtual Interval statistic_mean_range() const = 0;  // open image of m
  virtual double base_sample(Rng& rng) const = 0;     // exact draw from p_X

  // Closed-form member with density exp(t·u(x) - K(t)) p_X(x).
  virtual std::unique_ptr<TiltableFamily> tilted(double t) const = 0;
  virtual std::unique_ptr<TiltableFamily> clone() const = 0;

  // Solve m(t) = alpha. Default expands a bracket geometrically from t = 0
  // (capped near the MGF domain boundary) and runs safeguarded Newton with
  // s²(t) as the derivative; built-in families override with closed forms.
  virtual double tilt_solve(double alpha) const;

  // Closed-form chain steps; families without an exact Gaussian reduction
  // return nullopt and the chain falls back to the generic formula.
  virtual std::optional<GaussStep> gauss_tilted(double /*alpha*/) const { return std::nullopt; }
  virtual std::optional<GaussStep> gauss_step(double /*m_i*/, double /*n_minus_i*/) const {
    return std::nullopt;
  }
};

// Exponential with given rate; u(x) = x.
class Exponential final : public TiltableFamily {
 public:
  explicit Exponential(double rate);
  std::string name() const override { return "exponential"; }
  double log_density(double x) const override;
  double statistic(double x) const override { return x; }
  Interval support() const override { return Interval::positive(); }
  Interval mgf_domain() const override;
  double log_mgf(double t) const override;
  Cumulants cumulants(double t) const override;
  Interval statistic_mean_range() const override { return Interval::positive(); }
  double base_sample(Rng& rng) const override;
  std::unique_ptr<TiltableFamily> tilted(double t) const override;
  std::unique_ptr<TiltableFamily> clone() const override;
  double tilt_solve(double alpha) const override;
  double rate() const { return rate_; }

 private:
  double rate_;
};

// Gamma(shape, scale) with u(x) = x; tilting rescales.
class GammaSum final : public TiltableFamily {
 public:
  GammaSum(double shape, double scale);
  std::string name() const override { return "gamma[u=x]"; }
  double log_density(double x) const override;
  double statistic(double x) const override { return x; }
  Interval support() const override { return Interval::positive(); }
  Interval mgf_domain() const override;
  double log_mgf(double t) const override;
  Cumulants cumulants(double t) const override;
  Interval statistic_mean_range() const override { return Interval::positive(); }
  double base_sample(Rng& rng) const override;
  std::unique_ptr<TiltableFamily> tilted(double t) const override;
  std::unique_ptr<TiltableFamily> clone() const override;
  double tilt_solve(double alpha) const override;
  double shape() const { return shape_; }
  double scale() const { return scale_; }

 private:
  double shape_, scale_;
  double log_norm_;  // -shape·log(scale) - lgamma(shape)
};

// Gamma(shape, scale) with u(x) = log x; tilting shifts the shape.
class GammaLogSum final : public TiltableFamily {
 public:
  GammaLogSum(double shape, double scale);
  std::string name() const override { return "gamma[u=log x]"; }
  double log_density(double x) const override;
  double statistic(double x) const override;
  Interval support() const override { return Interval::positive(); }
  Interval mgf_domain() const override;
  double log_mgf(double t) const override;
  Cumulants cumulants(double t) const override;
  Interval statistic_mean_range() const override { return Interval::real_line(); }
  double base_sample(Rng& rng) const override;
  std::unique_ptr<TiltableFamily> tilted(double t) const override;
  std::unique_ptr<TiltableFamily> clone() const override;
  double tilt_solve(double alpha) const override;
  double shape() const { return shape_; }
  double scale() const { return scale_; }

 private:
  double shape_, scale_;
  double log_norm_;
};

// Normal(mean, variance) with u(x) = x. Provides the exact Gaussian chain
// steps; every density the chain needs is free of the mean parameter.
class Normal final : public TiltableFamily {
 public:
  Normal(double mean, double variance);
  std::string name() const override { return "normal"; }
  double log_density(double x) const override;
  double statistic(double x) const override { return x; }
  Interval support() const override { return Interval::real_line(); }
  Interval mgf_domain() const override { return Interval::real_line(); }
  double log_mgf(double t) const override;
  Cumulants cumulants(double t) const override;
  Interval statistic_mean_range() const override { return Interval::real_line(); }
  double base_sample(Rng& rng) const override;
  std::unique_ptr<TiltableFamily> tilted(double t) const override;
  std::unique_ptr<TiltableFamily> clone() const override;
  double tilt_solve(double alpha) const override;
  std::optional<GaussStep> gauss_tilted(double alpha) const override;
  std::optional<GaussStep> gauss_step(double m_i, double n_minus_i) const override;
  double mean() const { return mean_; }
  double variance() const { return var_; }

 private:
  double mean_, var_;
};

// Inverse Gaussian(mu, lambda) with u(x) = x; the statistic sum is the
// canonical pairing with the x-coefficient -lambda/(2 mu²).
class InverseGaussianSum final : public TiltableFamily {
 public:
  InverseGaussianSum(double mu, double lambda);
  std::string name() const override { return "inverse_gaussian[u=x]"; }
  double log_density(double x) const override;
  double statistic(double x) const override { return x; }
  Interval support() const override { return Interval::positive(); }
  Interval mgf_domain() const override;
  double log_mgf(double t) const override;
  Cumulants cumulants(double t) const override;
  Interval statistic_mean_range() const override { return Interval::positive(); }
  double base_sample(Rng& rng) const override;
  std::unique_ptr<TiltableFamily> tilted(double t) const override;
  std::unique_ptr<TiltableFamily> clone() const override;
  double tilt_solve(double alpha) const override;
  double mu() const { return mu_; }
  double lambda() const { return lambda_; }

 private:
  double mu_, lambda_;
};

// Inverse Gaussian(mu, lambda) with u(x) = 1/x, the canonical pairing with
// -lambda/2. Cumulants come from the closed-form log-MGF of 1/X.
class InverseGaussianReciprocal final : public TiltableFamily {
 public:
  InverseGaussianReciprocal(double mu, double lambda);
  std::string name() const override { return "inverse_gaussian[u=1/x]"; }
  double log_density(double x) const override;
  double statistic(double x) const override;
  Interval support() const override { return Interval::positive(); }
  Interval mgf_domain() const override;
  double log_mgf(double t) const override;
  Cumulants cumulants(double t) const override;
  Interval statistic_mean_range() const override { return Interval::positive(); }
  double base_sample(Rng& rng) const override;
  std::unique_ptr<TiltableFamily> tilted(double t) const override;
  std::unique_ptr<TiltableFamily> clone() const override;
  double tilt_solve(double alpha) const override;
  double mu() const { return mu_; }
  double lambda() const { return lambda_; }

 private:
  double mu_, lambda_;
};

// Tilted wrapper without closed forms, exp(t·u(x) - K(t)) p_X(x). Used to
// cross-check the closed-form tilted members.
class GenericTilted final : public TiltableFamily {
 public:
  GenericTilted(std::unique_ptr<TiltableFamily> base, double t);
  std::string name() const override;
  double log_density(double x) const override;
  double statistic(double x) const override;
  Interval support() const override;
  Interval mgf_domain() const override;
  double log_mgf(double s) const override;
  Cumulants cumulants(double s) const override;
  Interval statistic_mean_range() const override;
  double base_sample(Rng& rng) const override;
  std::unique_ptr<TiltableFamily> tilted(double s) const override;
  std::unique_ptr<TiltableFamily> clone() const override;

 private:
  std::shared_ptr<const TiltableFamily> base_;
  double t_;
  double log_mgf_t_;
};

// Exponential change of measure recentred so the tilted mean of u(X) is
// alpha. Returns the closed-form member for the built-in families. Throws
// AlphaOutOfRange when alpha is outside the statistic's mean range.
std::unique_ptr<TiltableFamily> tilt(const TiltableFamily& family, double alpha);

// cumulants_at with domain validation; analytic values, cross-checked in the
// test suite against numerics::differentiate of log_mgf.
Cumulants cumulants_at(const TiltableFamily& family, double t);

// Families by config identifier ("exponential", "gamma", "normal",
// "inverse_gaussian") and statistic ("sum", "sum_log", "sum_reciprocal"),
// with named parameters. Throws ConfigError for unknown combinations.
std::unique_ptr<TiltableFamily> make_family(const std::string& id,
                                            const std::string& statistic,
                                            const std::map<std::string, double>& params);

}  // namespace condinf

#endif
