#include "condinf/proxy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "condinf/errors.hpp"
#include "condinf/numerics.hpp"

namespace condinf {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance)) - d * d / (2.0 * variance);
}

// Coarse maximum of a log-integrand, probed through the same change of
// variable the quadrature uses. Only has to land within a few log-units of
// the true maximum to keep exp() in range.
double probe_log_max(const std::function<double(double)>& logf, const Interval& s) {
  auto to_x = [&](double q) {
    if (s.finite_lo() && s.finite_hi()) return s.lo + q * (s.hi - s.lo);
    if (s.finite_lo()) return s.lo + q / (1.0 - q);
    if (s.finite_hi()) return s.hi - q / (1.0 - q);
    const double v = 2.0 * q - 1.0;
    return v / (1.0 - v * v);
  };
  double best = -kInf;
  constexpr int kProbes = 48;
  for (int j = 1; j <= kProbes; ++j) {
    const double v = logf(to_x(j / (kProbes + 1.0)));
    if (v > best) best = v;
  }
  return best;
}

}  // namespace

ProxyChain::ProxyChain(const TiltableFamily& family, double u_total, std::size_t n,
                       std::size_t k)
    : family_(&family), u_total_(u_total), n_(n), k_(k) {
  if (k < 1 || n < 2 || k > n - 1)
    throw OutOfDomain("proxy chain requires 1 <= k <= n-1, got k=" + std::to_string(k) +
                      ", n=" + std::to_string(n));
  if (!std::isfinite(u_total)) throw OutOfDomain("u_total must be finite");
  history_.reserve(k);
}

const StepRecord& ProxyChain::step() {
  if (current_) return *current_;
  if (done()) throw OutOfDomain("proxy chain already complete");

  StepRecord rec;
  rec.index = i_;
  rec.m_i = (u_total_ - u_running_) / static_cast<double>(n_ - i_);
  if (!family_->statistic_mean_range().contains(rec.m_i))
    throw AlphaOutOfRange(family_->name() + ": conditioning target m_i=" +
                          std::to_string(rec.m_i) + " left the statistic mean range at step " +
                          std::to_string(i_));
  rec.log_ci = kNaN;

  if (i_ == 0) {
    rec.tilted_step = true;
    rec.gauss = family_->gauss_tilted(rec.m_i);
    rec.t_i = family_->tilt_solve(rec.m_i);
    const Cumulants c = family_->cumulants(rec.t_i);
    rec.s2_i = c.variance;
    rec.mu3_i = c.third;
    rec.beta = kNaN;
    rec.alpha_shift = kNaN;
    rec.log_ci = 0.0;  // the tilted density is normalized by construction
  } else {
    const double remaining = static_cast<double>(n_ - i_);
    rec.gauss = family_->gauss_step(rec.m_i, remaining);
    rec.t_i = family_->tilt_solve(rec.m_i);
    const Cumulants c = family_->cumulants(rec.t_i);
    rec.s2_i = c.variance;
    rec.mu3_i = c.third;
    const double nm1 = remaining - 1.0;  // n - i - 1, >= 1 since k <= n-1
    rec.beta = rec.s2_i * nm1;
    rec.alpha_shift = rec.t_i + rec.mu3_i / (2.0 * rec.s2_i * rec.s2_i * nm1);
    if (rec.gauss) rec.log_ci = 0.0;  // closed form is already normalized
  }
  current_ = rec;
  return *current_;
}

double ProxyChain::log_density_prepared(const StepRecord& rec, double x) const {
  if (rec.gauss) return log_normal_pdf(x, rec.gauss->mean, rec.gauss->variance);
  if (rec.tilted_step)
    return rec.t_i * family_->statistic(x) - family_->log_mgf(rec.t_i) +
           family_->log_density(x);
  return rec.log_ci + family_->log_density(x) +
         log_normal_pdf(family_->statistic(x), rec.alpha_shift * rec.beta, rec.beta);
}

void ProxyChain::ensure_normalizer(StepRecord& rec) {
  if (!std::isnan(rec.log_ci)) return;
  // C_i normalizes p_X(x)·n(alpha·beta, beta, u(x)); computed in log scale
  // with an offset so the integrand stays in double range.
  auto log_integrand = [&](double x) {
    return family_->log_density(x) +
           log_normal_pdf(family_->statistic(x), rec.alpha_shift * rec.beta, rec.beta);
  };
  const Interval s = family_->support();
  const double off = probe_log_max(log_integrand, s);
  if (!std::isfinite(off))
    throw QuadratureFailure("step normalizer: integrand has no finite values (step " +
                            std::to_string(rec.index) + ")");
  auto f = [&](double x) { return std::exp(log_integrand(x) - off); };
  const QuadratureResult q = integrate_adaptive(f, s, 1e-8);
  if (!(q.value > 0.0) || !std::isfinite(q.value))
    throw QuadratureFailure("step normalizer: integral not positive (step " +
                            std::to_string(rec.index) + ")");
  if (!q.converged && q.abs_error_estimate > 1e-6 * q.value)
    throw QuadratureFailure("step normalizer: tolerance not reached (step " +
                            std::to_string(rec.index) + ")");
  rec.log_ci = -(std::log(q.value) + off);
}

double ProxyChain::step_log_density(double x_next) {
  if (!family_->support().contains(x_next))
    throw OutOfDomain("coordinate outside the family support at step " +
                      std::to_string(i_));
  step();
  ensure_normalizer(*current_);
  return log_density_prepared(*current_, x_next);
}

double ProxyChain::sample_step(Rng& rng, SamplerStats* stats, StepSampler sampler) {
  const StepRecord& rec = step();

  if (rec.gauss) {
    if (stats) {
      ++stats->proposals;
      ++stats->accepted;
      stats->max_ratio = std::max(stats->max_ratio, 1.0);
    }
    return rec.gauss->mean + std::sqrt(rec.gauss->variance) * rng.normal();
  }

  if (sampler == StepSampler::inversion) {
    ensure_normalizer(*current_);
    const StepRecord frozen = *current_;
    const Interval s = family_->support();
    auto cdf = [&](double x) {
      auto dens = [&](double y) { return std::exp(log_density_prepared(frozen, y)); };
      const QuadratureResult q = integrate_adaptive(dens, {s.lo, x}, 1e-9);
      return q.value;
    };
    const double u01 = rng.uniform();
    // expand a bracket outward from the conditioning target
    double center = rec.m_i;
    if (!s.contains(center)) center = 0.5 * (std::max(s.lo, -1e3) + std::min(s.hi, 1e3));
    double lo = center, hi = center, width = std::max(1.0, std::abs(center));
    while (cdf(hi) < u01 && hi < s.hi) hi = s.finite_hi() ? 0.5 * (hi + s.hi) : hi + (width *= 2.0);
    width = std::max(1.0, std::abs(center));
    while (cdf(lo) > u01 && lo > s.lo) lo = s.finite_lo() ? 0.5 * (lo + s.lo) : lo - (width *= 2.0);
    auto f = [&](double x) { return cdf(x) - u01; };
    auto df = [&](double x) { return std::exp(log_density_prepared(frozen, x)); };
    const double x = find_root_monotone(f, {lo, hi}, 1e-10, df);
    if (stats) {
      ++stats->proposals;
      ++stats->accepted;
    }
    return x;
  }

  // Acceptance-rejection with proposals from p_{X,θ*}. The Gaussian factor is
  // bounded by 1/sqrt(2πβ), so the acceptance ratio is
  // exp(-(u(x) - alpha·beta)²/(2β)) and never exceeds 1.
  if (rec.tilted_step) {
    const auto member = family_->tilted(rec.t_i);
    if (stats) {
      ++stats->proposals;
      ++stats->accepted;
      stats->max_ratio = std::max(stats->max_ratio, 1.0);
    }
    return member->base_sample(rng);
  }

  constexpr long kMaxProposals = 1000000;
  for (long attempt = 0; attempt < kMaxProposals; ++attempt) {
    const double x = family_->base_sample(rng);
    const double d = family_->statistic(x) - rec.alpha_shift * rec.beta;
    const double ratio = std::exp(-d * d / (2.0 * rec.beta));
    if (stats) {
      ++stats->proposals;
      stats->max_ratio = std::max(stats->max_ratio, ratio);
    }
    if (!(ratio <= 1.0 + 1e-9))
      throw EnvelopeViolated(family_->name() + ": acceptance ratio " +
                             std::to_string(ratio) + " exceeded the envelope at step " +
                             std::to_string(i_));
    if (rng.uniform() <= ratio) {
      if (stats) ++stats->accepted;
      return x;
    }
  }
  throw ChainError("acceptance-rejection stalled", static_cast<int>(i_));
}

void ProxyChain::advance(double x_next) {
  step();  // ensure the record exists even if the caller sampled externally
  history_.push_back(*current_);
  u_running_ += family_->statistic(x_next);
  ++i_;
  current_.reset();
}

double ProxyChain::step_normalizer_check(double rel_tol) {
  step();
  ensure_normalizer(*current_);
  const StepRecord frozen = *current_;
  auto dens = [&](double x) { return std::exp(log_density_prepared(frozen, x)); };
  return integrate_adaptive(dens, family_->support(), rel_tol).value;
}

double log_proxy_likelihood(const TiltableFamily& family, double u_total, std::size_t n,
                            std::span<const double> x) {
  ProxyChain chain(family, u_total, n, x.size());
  double total = 0.0;
  for (double xi : x) {
    total += chain.step_log_density(xi);
    chain.advance(xi);
  }
  return total;
}

std::vector<double> sample_proxy(const TiltableFamily& family, double u_total,
                                 std::size_t n, std::size_t k, Rng& rng,
                                 SamplerStats* stats, StepSampler sampler,
                                 int max_restarts) {
  for (int restart = 0; restart < max_restarts; ++restart) {
    try {
      ProxyChain chain(family, u_total, n, k);
      std::vector<double> draws;
      draws.reserve(k);
      while (!chain.done()) {
        const double x = chain.sample_step(rng, stats, sampler);
        chain.advance(x);
        draws.push_back(x);
      }
      return draws;
    } catch (const AlphaOutOfRange&) {
      if (stats) ++stats->aborts;
      // resample the whole replicate; restarting a single step would bias
      // the chain law
    }
  }
  throw ChainError("sample_proxy: exceeded " + std::to_string(max_restarts) +
                       " restarts after conditioning drift",
                   -1);
}

TypicalityReport check_typicality(const TiltableFamily& family, double u_total,
                                  std::size_t n) {
  if (n < 3) throw OutOfDomain("typicality check needs n >= 3");
  const Cumulants c = family.cumulants(0.0);
  const double nn = static_cast<double>(n);
  const double scale = std::sqrt(c.variance) * std::sqrt(2.0 * nn * std::log(std::log(nn)));
  const double ratio = std::abs(u_total - nn * c.mean) / scale;
  return {ratio, ratio > 3.0};
}

}  // namespace condinf
