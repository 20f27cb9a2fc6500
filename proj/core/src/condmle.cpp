#include "condinf/condmle.hpp"

#include <algorithm>
#include <cmath>

#include "condinf/errors.hpp"
#include "condinf/proxy.hpp"

namespace condinf {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

class ParabolaProfile final : public ProfileModel {
 public:
  std::string name() const override { return "parabola"; }

  double fit_nuisance(const McDataset& data, double theta,
                      double nr_start) const override {
    std::vector<PairObs> pairs(data.x.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = {data.x[i], data.y[i]};
    const NormalParabola model{0.0, theta};
    return mle_nuisance(model, theta, pairs, nr_start);
  }

  double log_conditional(const McDataset& data, double theta, double eta,
                         std::size_t k) const override {
    // independence of the x- and y-runs: the conditional likelihood is the
    // product of the two chain proxies; psi cancels inside each chain
    double ux = 0.0, uy = 0.0;
    for (double v : data.x) ux += v;
    for (double v : data.y) uy += v;
    const Normal fx(eta, theta);
    const Normal fy(eta * eta, theta);
    return log_proxy_likelihood(fx, ux, data.size(),
                                std::span<const double>(data.x).first(k)) +
           log_proxy_likelihood(fy, uy, data.size(),
                                std::span<const double>(data.y).first(k));
  }

  double log_unconditional(const McDataset& data, double theta,
                           double eta) const override {
    std::vector<PairObs> pairs(data.x.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = {data.x[i], data.y[i]};
    return NormalParabola::log_likelihood(eta, theta, pairs);
  }
};

class GammaShapeProfile final : public ProfileModel {
 public:
  std::string name() const override { return "gamma_shape"; }

  double fit_nuisance(const McDataset& data, double theta,
                      double nr_start) const override {
    return mle_nuisance(model_, theta, data.x, nr_start);
  }

  double log_conditional(const McDataset& data, double theta, double eta,
                         std::size_t k) const override {
    double u_total = 0.0;
    for (double v : data.x) u_total += v;
    const GammaSum family(theta, eta);
    return log_proxy_likelihood(family, u_total, data.size(),
                                std::span<const double>(data.x).first(k));
  }

  double log_unconditional(const McDataset& data, double theta,
                           double eta) const override {
    return model_.log_likelihood(theta, eta, data.x);
  }

 private:
  GammaShapeModel model_;
};

class NormalVarianceProfile final : public ProfileModel {
 public:
  std::string name() const override { return "normal_variance"; }

  double fit_nuisance(const McDataset& data, double theta,
                      double nr_start) const override {
    // score (x̄ - mu)·n/sigma²; kept on the Newton path for uniformity
    const double n = static_cast<double>(data.x.size());
    double xbar = 0.0;
    for (double v : data.x) xbar += v;
    xbar /= n;
    NewtonScoreProblem p{
        [&](double mu) { return n * (xbar - mu) / theta; },
        [&](double) { return -n / theta; },
        [&](double mu) { return -n * (xbar - mu) * (xbar - mu) / (2.0 * theta); },
        [](double mu) { return std::isfinite(mu); },
        1e-10 * n};
    try {
      return damped_newton(p, nr_start);
    } catch (const NewtonDiverged& e) {
      throw NuisanceMleFailed(std::string("normal_variance: ") + e.what());
    }
  }

  double log_conditional(const McDataset& data, double theta, double eta,
                         std::size_t k) const override {
    double u_total = 0.0;
    for (double v : data.x) u_total += v;
    const Normal family(eta, theta);
    return log_proxy_likelihood(family, u_total, data.size(),
                                std::span<const double>(data.x).first(k));
  }

  double log_unconditional(const McDataset& data, double theta,
                           double eta) const override {
    double ll = 0.0;
    for (double v : data.x) {
      const double d = v - eta;
      ll += -0.5 * (kLogTwoPi + std::log(theta)) - d * d / (2.0 * theta);
    }
    return ll;
  }
};

double golden_section_max(const std::function<double(double)>& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-10 * (1.0 + std::abs(a) + std::abs(b));
       ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::unique_ptr<ProfileModel> make_profile_model(const std::string& id) {
  if (id == "parabola") return std::make_unique<ParabolaProfile>();
  if (id == "gamma_shape") return std::make_unique<GammaShapeProfile>();
  if (id == "normal_variance") return std::make_unique<NormalVarianceProfile>();
  throw ConfigError("unknown profile model '" + id + "'");
}

std::vector<ProfilePoint> conditional_profile(const ProfileModel& model,
                                              const McDataset& data, std::size_t k,
                                              std::span<const double> theta_grid,
                                              double nr_start) {
  if (theta_grid.empty()) throw std::invalid_argument("empty theta grid");
  if (k > data.size() - 1)
    throw std::invalid_argument("profile requires k <= n-1");

  std::vector<ProfilePoint> profile;
  profile.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    ProfilePoint pt;
    pt.theta = theta;
    pt.nr_start = nr_start;
    try {
      pt.eta_hat = model.fit_nuisance(data, theta, nr_start);
      pt.log_cond_lik = model.log_conditional(data, theta, pt.eta_hat, k);
      pt.log_uncond_lik = model.log_unconditional(data, theta, pt.eta_hat);
    } catch (const NuisanceMleFailed&) {
      pt.mle_failed = true;
      pt.eta_hat = std::numeric_limits<double>::quiet_NaN();
      pt.log_cond_lik = std::numeric_limits<double>::quiet_NaN();
      pt.log_uncond_lik = std::numeric_limits<double>::quiet_NaN();
    }
    profile.push_back(pt);
  }
  return profile;
}

CondMleResult conditional_mle(const ProfileModel& model, const McDataset& data,
                              std::size_t k, Bracket search_interval, double nr_start,
                              std::size_t grid_points) {
  if (grid_points < 3) throw std::invalid_argument("need at least 3 grid points");
  std::vector<double> grid(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = search_interval.lo + (search_interval.hi - search_interval.lo) *
                                       static_cast<double>(i) /
                                       static_cast<double>(grid_points - 1);
  }
  std::vector<ProfilePoint> profile = conditional_profile(model, data, k, grid, nr_start);

  std::vector<double> values;
  std::size_t best = 0;
  double vmax = -std::numeric_limits<double>::infinity();
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (profile[i].mle_failed) continue;
    values.push_back(profile[i].log_cond_lik);
    if (profile[i].log_cond_lik > vmax) {
      vmax = profile[i].log_cond_lik;
      best = i;
    }
    vmin = std::min(vmin, profile[i].log_cond_lik);
  }
  if (values.empty()) throw NuisanceMleFailed("every profile row failed");

  std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
  const double med = values[values.size() / 2];
  if (vmax - vmin <= 1e-6 * std::max(1.0, std::abs(med)))
    throw FlatProfile(model.name() +
                      ": conditional profile is flat; the conditioning statistic "
                      "carries no information about the interest parameter");

  const double lo = best > 0 ? grid[best - 1] : grid[best];
  const double hi = best + 1 < grid.size() ? grid[best + 1] : grid[best];
  double theta_hat = grid[best];
  if (hi > lo) {
    auto value_at = [&](double theta) {
      const double eta = model.fit_nuisance(data, theta, nr_start);
      return model.log_conditional(data, theta, eta, k);
    };
    theta_hat = golden_section_max(value_at, lo, hi);
  }
  return {theta_hat, std::move(profile)};
}

}  // namespace condinf
