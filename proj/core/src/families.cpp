#include "condinf/families.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>

#include "condinf/errors.hpp"
#include "condinf/numerics.hpp"

namespace condinf {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw OutOfDomain(std::string(what) + " must be positive and finite");
}

void require_in(const Interval& dom, double t, const char* what) {
  if (!dom.contains(t)) throw OutOfDomain(std::string(what) + ": t outside MGF domain");
}

// Inverse of the digamma function by Newton iteration; start values follow
// the usual asymptotic split at psi(x) ~ log x vs psi(x) ~ -1/x.
double inverse_digamma(double y) {
  double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y + 0.5772156649015329);
  for (int i = 0; i < 12; ++i) {
    const double step = (boost::math::digamma(x) - y) / boost::math::trigamma(x);
    x -= step;
    if (x <= 0.0) x = 1e-12;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(x))) break;
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// default tilt solve: bracket expansion from t = 0 + safeguarded Newton

double TiltableFamily::tilt_solve(double alpha) const {
  if (!statistic_mean_range().contains(alpha))
    throw AlphaOutOfRange(name() + ": alpha outside statistic mean range");

  const Interval dom = mgf_domain();
  auto cap = [](double edge) {
    return edge - 1e-10 * std::max(1.0, std::abs(edge));  // stay off the boundary
  };

  const double m0 = cumulants(0.0).mean;
  double lo = 0.0, hi = 0.0;
  if (alpha > m0) {
    double step = 1e-3;
    for (int i = 0; i < 200; ++i) {
      hi = dom.finite_hi() ? std::min(hi + step, cap(dom.hi)) : hi + step;
      if (cumulants(hi).mean >= alpha) break;
      if (dom.finite_hi() && hi >= cap(dom.hi))
        throw AlphaOutOfRange(name() + ": mean target unreachable before domain edge");
      step *= 2.0;
    }
  } else if (alpha < m0) {
    double step = 1e-3;
    for (int i = 0; i < 200; ++i) {
      lo = dom.finite_lo() ? std::max(lo - step, -cap(-dom.lo)) : lo - step;
      if (cumulants(lo).mean <= alpha) break;
      if (dom.finite_lo() && lo <= -cap(-dom.lo))
        throw AlphaOutOfRange(name() + ": mean target unreachable before domain edge");
      step *= 2.0;
    }
  } else {
    return 0.0;
  }

  auto f = [&](double t) { return cumulants(t).mean - alpha; };
  auto df = [&](double t) { return cumulants(t).variance; };
  return find_root_monotone(f, {lo, hi}, 1e-12, df);
}

std::unique_ptr<TiltableFamily> tilt(const TiltableFamily& family, double alpha) {
  if (!family.statistic_mean_range().contains(alpha))
    throw AlphaOutOfRange(family.name() + ": alpha outside statistic mean range");
  return family.tilted(family.tilt_solve(alpha));
}

Cumulants cumulants_at(const TiltableFamily& family, double t) {
  require_in(family.mgf_domain(), t, family.name().c_str());
  return family.cumulants(t);
}

// ---------------------------------------------------------------------------
// Exponential(rate), u = x

Exponential::Exponential(double rate) : rate_(rate) { require_positive(rate, "rate"); }

double Exponential::log_density(double x) const {
  return x > 0.0 ? std::log(rate_) - rate_ * x : -std::numeric_limits<double>::infinity();
}
Interval Exponential::mgf_domain() const {
  return {-std::numeric_limits<double>::infinity(), rate_};
}
double Exponential::log_mgf(double t) const {
  require_in(mgf_domain(), t, "exponential");
  return -std::log1p(-t / rate_);
}
Cumulants Exponential::cumulants(double t) const {
  require_in(mgf_domain(), t, "exponential");
  const double r = 1.0 / (rate_ - t);
  return {r, r * r, 2.0 * r * r * r};
}
double Exponential::base_sample(Rng& rng) const { return rng.exponential(rate_); }
std::unique_ptr<TiltableFamily> Exponential::tilted(double t) const {
  require_in(mgf_domain(), t, "exponential");
  return std::make_unique<Exponential>(rate_ - t);
}
std::unique_ptr<TiltableFamily> Exponential::clone() const {
  return std::make_unique<Exponential>(*this);
}
double Exponential::tilt_solve(double alpha) const {
  if (!(alpha > 0.0)) throw AlphaOutOfRange("exponential: alpha must be positive");
  return rate_ - 1.0 / alpha;
}

// ---------------------------------------------------------------------------
// Gamma(shape, scale), u = x

GammaSum::GammaSum(double shape, double scale) : shape_(shape), scale_(scale) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  log_norm_ = -shape_ * std::log(scale_) - std::lgamma(shape_);
}
double GammaSum::log_density(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return log_norm_ + (shape_ - 1.0) * std::log(x) - x / scale_;
}
Interval GammaSum::mgf_domain() const {
  return {-std::numeric_limits<double>::infinity(), 1.0 / scale_};
}
double GammaSum::log_mgf(double t) const {
  require_in(mgf_domain(), t, "gamma[u=x]");
  return -shape_ * std::log1p(-scale_ * t);
}
Cumulants GammaSum::cumulants(double t) const {
  require_in(mgf_domain(), t, "gamma[u=x]");
  const double w = scale_ / (1.0 - scale_ * t);  // tilted scale
  return {shape_ * w, shape_ * w * w, 2.0 * shape_ * w * w * w};
}
double GammaSum::base_sample(Rng& rng) const { return rng.gamma(shape_, scale_); }
std::unique_ptr<TiltableFamily> GammaSum::tilted(double t) const {
  require_in(mgf_domain(), t, "gamma[u=x]");
  return std::make_unique<GammaSum>(shape_, scale_ / (1.0 - scale_ * t));
}
std::unique_ptr<TiltableFamily> GammaSum::clone() const {
  return std::make_unique<GammaSum>(*this);
}
double GammaSum::tilt_solve(double alpha) const {
  if (!(alpha > 0.0)) throw AlphaOutOfRange("gamma[u=x]: alpha must be positive");
  return 1.0 / scale_ - shape_ / alpha;
}

// ---------------------------------------------------------------------------
// Gamma(shape, scale), u = log x

GammaLogSum::GammaLogSum(double shape, double scale) : shape_(shape), scale_(scale) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  log_norm_ = -shape_ * std::log(scale_) - std::lgamma(shape_);
}
double GammaLogSum::log_density(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return log_norm_ + (shape_ - 1.0) * std::log(x) - x / scale_;
}
double GammaLogSum::statistic(double x) const { return std::log(x); }
Interval GammaLogSum::mgf_domain() const {
  return {-shape_, std::numeric_limits<double>::infinity()};
}
double GammaLogSum::log_mgf(double t) const {
  require_in(mgf_domain(), t, "gamma[u=log x]");
  return t * std::log(scale_) + std::lgamma(shape_ + t) - std::lgamma(shape_);
}
Cumulants GammaLogSum::cumulants(double t) const {
  require_in(mgf_domain(), t, "gamma[u=log x]");
  const double a = shape_ + t;
  return {std::log(scale_) + boost::math::digamma(a), boost::math::trigamma(a),
          boost::math::polygamma(2, a)};
}
double GammaLogSum::base_sample(Rng& rng) const { return rng.gamma(shape_, scale_); }
std::unique_ptr<TiltableFamily> GammaLogSum::tilted(double t) const {
  require_in(mgf_domain(), t, "gamma[u=log x]");
  return std::make_unique<GammaLogSum>(shape_ + t, scale_);
}
std::unique_ptr<TiltableFamily> GammaLogSum::clone() const {
  return std::make_unique<GammaLogSum>(*this);
}
double GammaLogSum::tilt_solve(double alpha) const {
  return inverse_digamma(alpha - std::log(scale_)) - shape_;
}

// ---------------------------------------------------------------------------
// Normal(mean, variance), u = x

Normal::Normal(double mean, double variance) : mean_(mean), var_(variance) {
  require_positive(variance, "variance");
}
double Normal::log_density(double x) const {
  const double d = x - mean_;
  return -0.5 * (kLogTwoPi + std::log(var_)) - d * d / (2.0 * var_);
}
double Normal::log_mgf(double t) const { return mean_ * t + 0.5 * var_ * t * t; }
Cumulants Normal::cumulants(double t) const { return {mean_ + var_ * t, var_, 0.0}; }
double Normal::base_sample(Rng& rng) const { return mean_ + std::sqrt(var_) * rng.normal(); }
std::unique_ptr<TiltableFamily> Normal::tilted(double t) const {
  return std::make_unique<Normal>(mean_ + var_ * t, var_);
}
std::unique_ptr<TiltableFamily> Normal::clone() const {
  return std::make_unique<Normal>(*this);
}
double Normal::tilt_solve(double alpha) const { return (alpha - mean_) / var_; }
std::optional<GaussStep> Normal::gauss_tilted(double alpha) const {
  return GaussStep{alpha, var_};
}
std::optional<GaussStep> Normal::gauss_step(double m_i, double n_minus_i) const {
  // p(x)·n(αβ, β, x) completes the square; the mean parameter drops out.
  const double c = (n_minus_i - 1.0) / n_minus_i;
  return GaussStep{m_i * c, var_ * c};
}

// ---------------------------------------------------------------------------
// Inverse Gaussian(mu, lambda), u = x

InverseGaussianSum::InverseGaussianSum(double mu, double lambda) : mu_(mu), lambda_(lambda) {
  require_positive(mu, "mu");
  require_positive(lambda, "lambda");
}
double InverseGaussianSum::log_density(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  const double d = x - mu_;
  return 0.5 * (std::log(lambda_) - kLogTwoPi) - 1.5 * std::log(x) -
         lambda_ * d * d / (2.0 * mu_ * mu_ * x);
}
Interval InverseGaussianSum::mgf_domain() const {
  return {-std::numeric_limits<double>::infinity(), lambda_ / (2.0 * mu_ * mu_)};
}
double InverseGaussianSum::log_mgf(double t) const {
  require_in(mgf_domain(), t, "inverse_gaussian[u=x]");
  return lambda_ / mu_ * (1.0 - std::sqrt(1.0 - 2.0 * mu_ * mu_ * t / lambda_));
}
Cumulants InverseGaussianSum::cumulants(double t) const {
  require_in(mgf_domain(), t, "inverse_gaussian[u=x]");
  // the tilted member is IG(mu/c, lambda), so the cumulants are the IG
  // moment formulas evaluated at the tilted mean
  const double c = std::sqrt(1.0 - 2.0 * mu_ * mu_ * t / lambda_);
  const double m = mu_ / c;
  return {m, m * m * m / lambda_, 3.0 * std::pow(m, 5) / (lambda_ * lambda_)};
}
double InverseGaussianSum::base_sample(Rng& rng) const {
  return rng.inverse_gaussian(mu_, lambda_);
}
std::unique_ptr<TiltableFamily> InverseGaussianSum::tilted(double t) const {
  require_in(mgf_domain(), t, "inverse_gaussian[u=x]");
  const double c = std::sqrt(1.0 - 2.0 * mu_ * mu_ * t / lambda_);
  return std::make_unique<InverseGaussianSum>(mu_ / c, lambda_);
}
std::unique_ptr<TiltableFamily> InverseGaussianSum::clone() const {
  return std::make_unique<InverseGaussianSum>(*this);
}
double InverseGaussianSum::tilt_solve(double alpha) const {
  if (!(alpha > 0.0)) throw AlphaOutOfRange("inverse_gaussian[u=x]: alpha must be positive");
  const double r = mu_ / alpha;
  return lambda_ * (1.0 - r * r) / (2.0 * mu_ * mu_);
}

// ---------------------------------------------------------------------------
// Inverse Gaussian(mu, lambda), u = 1/x

InverseGaussianReciprocal::InverseGaussianReciprocal(double mu, double lambda)
    : mu_(mu), lambda_(lambda) {
  require_positive(mu, "mu");
  require_positive(lambda, "lambda");
}
double InverseGaussianReciprocal::log_density(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  const double d = x - mu_;
  return 0.5 * (std::log(lambda_) - kLogTwoPi) - 1.5 * std::log(x) -
         lambda_ * d * d / (2.0 * mu_ * mu_ * x);
}
double InverseGaussianReciprocal::statistic(double x) const { return 1.0 / x; }
Interval InverseGaussianReciprocal::mgf_domain() const {
  return {-std::numeric_limits<double>::infinity(), lambda_ / 2.0};
}
double InverseGaussianReciprocal::log_mgf(double t) const {
  require_in(mgf_domain(), t, "inverse_gaussian[u=1/x]");
  // K(t) for 1/X: (lambda - sqrt(lambda(lambda-2t)))/mu - log((lambda-2t)/lambda)/2
  const double w = lambda_ - 2.0 * t;
  return (lambda_ - std::sqrt(lambda_ * w)) / mu_ - 0.5 * std::log(w / lambda_);
}
Cumulants InverseGaussianReciprocal::cumulants(double t) const {
  require_in(mgf_domain(), t, "inverse_gaussian[u=1/x]");
  const double w = lambda_ - 2.0 * t;
  const double sl = std::sqrt(lambda_);
  return {sl / (mu_ * std::sqrt(w)) + 1.0 / w,
          sl / (mu_ * std::pow(w, 1.5)) + 2.0 / (w * w),
          3.0 * sl / (mu_ * std::pow(w, 2.5)) + 8.0 / (w * w * w)};
}
double InverseGaussianReciprocal::base_sample(Rng& rng) const {
  return rng.inverse_gaussian(mu_, lambda_);
}
std::unique_ptr<TiltableFamily> InverseGaussianReciprocal::tilted(double t) const {
  require_in(mgf_domain(), t, "inverse_gaussian[u=1/x]");
  const double w = lambda_ - 2.0 * t;
  return std::make_unique<InverseGaussianReciprocal>(mu_ * std::sqrt(w / lambda_), w);
}
std::unique_ptr<TiltableFamily> InverseGaussianReciprocal::clone() const {
  return std::make_unique<InverseGaussianReciprocal>(*this);
}
double InverseGaussianReciprocal::tilt_solve(double alpha) const {
  if (!(alpha > 0.0))
    throw AlphaOutOfRange("inverse_gaussian[u=1/x]: alpha must be positive");
  // mean of 1/X under tilt t is z/mu + z²/lambda with z = sqrt(lambda/(lambda-2t))
  const double z =
      0.5 * lambda_ * (-1.0 / mu_ + std::sqrt(1.0 / (mu_ * mu_) + 4.0 * alpha / lambda_));
  return 0.5 * lambda_ * (1.0 - 1.0 / (z * z));
}

// ---------------------------------------------------------------------------
// GenericTilted

GenericTilted::GenericTilted(std::unique_ptr<TiltableFamily> base, double t)
    : base_(std::move(base)), t_(t) {
  require_in(base_->mgf_domain(), t, "generic tilt");
  log_mgf_t_ = base_->log_mgf(t_);
}
std::string GenericTilted::name() const {
  return base_->name() + "+tilt(" + std::to_string(t_) + ")";
}
double GenericTilted::log_density(double x) const {
  return t_ * base_->statistic(x) - log_mgf_t_ + base_->log_density(x);
}
double GenericTilted::statistic(double x) const { return base_->statistic(x); }
Interval GenericTilted::support() const { return base_->support(); }
Interval GenericTilted::mgf_domain() const {
  const Interval d = base_->mgf_domain();
  return {d.lo == -std::numeric_limits<double>::infinity() ? d.lo : d.lo - t_,
          d.hi == std::numeric_limits<double>::infinity() ? d.hi : d.hi - t_};
}
double GenericTilted::log_mgf(double s) const { return base_->log_mgf(t_ + s) - log_mgf_t_; }
Cumulants GenericTilted::cumulants(double s) const { return base_->cumulants(t_ + s); }
Interval GenericTilted::statistic_mean_range() const { return base_->statistic_mean_range(); }
double GenericTilted::base_sample(Rng&) const {
  throw OutOfDomain("GenericTilted has no direct sampler");
}
std::unique_ptr<TiltableFamily> GenericTilted::tilted(double s) const {
  return std::make_unique<GenericTilted>(base_->clone(), t_ + s);
}
std::unique_ptr<TiltableFamily> GenericTilted::clone() const {
  return std::make_unique<GenericTilted>(base_->clone(), t_);
}

// ---------------------------------------------------------------------------
// factory

namespace {
double named(const std::map<std::string, double>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError("missing family parameter '" + key + "'");
  return it->second;
}
}  // namespace

std::unique_ptr<TiltableFamily> make_family(const std::string& id,
                                            const std::string& statistic,
                                            const std::map<std::string, double>& params) {
  if (id == "exponential" && statistic == "sum")
    return std::make_unique<Exponential>(named(params, "rate"));
  if (id == "gamma" && statistic == "sum")
    return std::make_unique<GammaSum>(named(params, "shape"), named(params, "scale"));
  if (id == "gamma" && statistic == "sum_log")
    return std::make_unique<GammaLogSum>(named(params, "shape"), named(params, "scale"));
  if (id == "normal" && statistic == "sum")
    return std::make_unique<Normal>(named(params, "mean"), named(params, "variance"));
  if (id == "inverse_gaussian" && statistic == "sum")
    return std::make_unique<InverseGaussianSum>(named(params, "mu"), named(params, "lambda"));
  if (id == "inverse_gaussian" && statistic == "sum_reciprocal")
    return std::make_unique<InverseGaussianReciprocal>(named(params, "mu"),
                                                       named(params, "lambda"));
  throw ConfigError("unknown family/statistic combination: " + id + "/" + statistic);
}

}  // namespace condinf
