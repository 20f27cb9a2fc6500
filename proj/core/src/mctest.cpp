#include "condinf/mctest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "condinf/errors.hpp"
#include "condinf/parallel.hpp"

namespace condinf {

std::string to_string(TestMethod m) {
  return m == TestMethod::conditional ? "conditional" : "bootstrap";
}
std::string to_string(Tail t) { return t == Tail::upper ? "upper" : "lower"; }

namespace {

void validate_spec(const McTestSpec& spec) {
  if (spec.L < 20) throw std::invalid_argument("mc test requires L >= 20");
  if (spec.k < 2 || spec.k + 2 > spec.n)
    throw std::invalid_argument("mc test requires 2 <= k <= n-2");
}

std::vector<PairObs> as_pairs(const McDataset& data) {
  std::vector<PairObs> pairs(data.x.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = {data.x[i], data.y[i]};
  return pairs;
}

// ----- gamma, H0 on the shape; scale eliminated by conditioning on Σx -----

class GammaShapeScenario final : public McScenario {
 public:
  std::string name() const override { return "gamma_shape"; }

  McDataset generate(double theta, double eta, std::size_t n, Rng& rng) const override {
    McDataset d;
    d.x.resize(n);
    for (auto& v : d.x) v = rng.gamma(theta, eta);
    return d;
  }

  double observed_stat(const McDataset& data, std::size_t k) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(data.x[i]);
    return s;
  }

  double fit_nuisance(const McDataset& data, double theta0,
                      double nr_start) const override {
    return mle_nuisance(model_, theta0, data.x, nr_start);
  }

  double conditional_stat(const McDataset& data, double theta0, double eta_hat,
                          std::size_t k, Rng& rng, SamplerStats* stats) const override {
    double u_total = 0.0;
    for (double v : data.x) u_total += v;
    const GammaSum family(theta0, eta_hat);
    const std::vector<double> draw =
        sample_proxy(family, u_total, data.size(), k, rng, stats);
    double s = 0.0;
    for (double v : draw) s += std::log(v);
    return s;
  }

  double bootstrap_stat(double theta0, double eta_hat, std::size_t k,
                        Rng& rng) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(rng.gamma(theta0, eta_hat));
    return s;
  }

 private:
  GammaShapeModel model_;
};

// ----- gamma, H0 on the scale; shape eliminated by conditioning on Σlog x -----

class GammaScaleScenario final : public McScenario {
 public:
  std::string name() const override { return "gamma_scale"; }

  McDataset generate(double theta, double eta, std::size_t n, Rng& rng) const override {
    McDataset d;
    d.x.resize(n);
    for (auto& v : d.x) v = rng.gamma(eta, theta);  // theta = scale, eta = shape
    return d;
  }

  double observed_stat(const McDataset& data, std::size_t k) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += data.x[i];
    return s;
  }

  double fit_nuisance(const McDataset& data, double theta0,
                      double nr_start) const override {
    return mle_nuisance(model_, theta0, data.x, nr_start);
  }

  double conditional_stat(const McDataset& data, double theta0, double eta_hat,
                          std::size_t k, Rng& rng, SamplerStats* stats) const override {
    double u_total = 0.0;
    for (double v : data.x) u_total += std::log(v);
    const GammaLogSum family(eta_hat, theta0);
    const std::vector<double> draw =
        sample_proxy(family, u_total, data.size(), k, rng, stats);
    double s = 0.0;
    for (double v : draw) s += v;
    return s;
  }

  double bootstrap_stat(double theta0, double eta_hat, std::size_t k,
                        Rng& rng) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += rng.gamma(eta_hat, theta0);
    return s;
  }

 private:
  GammaScaleModel model_;
};

// ----- normal parabola, H0 on the common variance -----
//
// Interest statistic per pair is x² + y², the canonical pairing with
// -1/(2σ²). Conditioning is on (Σx, Σy); both chains are Gaussian with
// u(x) = x, so the plug-in psi-hat cancels from the conditional replicates
// exactly, which is the whole point of the scenario.

class ParabolaVarianceScenario final : public McScenario {
 public:
  std::string name() const override { return "parabola_variance"; }

  McDataset generate(double theta, double eta, std::size_t n, Rng& rng) const override {
    const NormalParabola model{eta, theta};  // eta = psi, theta = sigma²
    McDataset d;
    d.x.resize(n);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const PairObs o = model.sample(rng);
      d.x[i] = o.x;
      d.y[i] = o.y;
    }
    return d;
  }

  double observed_stat(const McDataset& data, std::size_t k) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      s += data.x[i] * data.x[i] + data.y[i] * data.y[i];
    return s;
  }

  double fit_nuisance(const McDataset& data, double theta0,
                      double nr_start) const override {
    const std::vector<PairObs> pairs = as_pairs(data);
    const NormalParabola model{0.0, theta0};
    return mle_nuisance(model, theta0, pairs, nr_start);
  }

  double conditional_stat(const McDataset& data, double theta0, double eta_hat,
                          std::size_t k, Rng& rng, SamplerStats* stats) const override {
    double ux = 0.0, uy = 0.0;
    for (double v : data.x) ux += v;
    for (double v : data.y) uy += v;
    const Normal fx(eta_hat, theta0);
    const Normal fy(eta_hat * eta_hat, theta0);
    const std::vector<double> dx = sample_proxy(fx, ux, data.size(), k, rng, stats);
    const std::vector<double> dy = sample_proxy(fy, uy, data.size(), k, rng, stats);
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += dx[i] * dx[i] + dy[i] * dy[i];
    return s;
  }

  double bootstrap_stat(double theta0, double eta_hat, std::size_t k,
                        Rng& rng) const override {
    const NormalParabola model{eta_hat, theta0};
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const PairObs o = model.sample(rng);
      s += o.x * o.x + o.y * o.y;
    }
    return s;
  }
};

McTestReport run_test(const McScenario& scenario, const McTestSpec& spec,
                      const McDataset& data, std::uint64_t seed, TestMethod method) {
  validate_spec(spec);
  if (data.size() != spec.n)
    throw std::invalid_argument("dataset size does not match spec.n");

  McTestReport report;
  report.method = method;
  report.eta_hat = scenario.fit_nuisance(data, spec.theta0, spec.nr_start);
  report.t_obs = scenario.observed_stat(data, spec.k);

  SamplerStats stats;
  report.simulated.resize(spec.L - 1);
  for (std::size_t l = 2; l <= spec.L; ++l) {
    Rng rng = stream_rng(seed, "mc.sim", l);
    report.simulated[l - 2] =
        method == TestMethod::conditional
            ? scenario.conditional_stat(data, spec.theta0, report.eta_hat, spec.k, rng,
                                        &stats)
            : scenario.bootstrap_stat(spec.theta0, report.eta_hat, spec.k, rng);
  }
  report.aborts = stats.aborts;

  Rng tie_rng = stream_rng(seed, "mc.tie");
  report.rank_of_obs = mc_rank(report.t_obs, report.simulated, spec.tail, tie_rng);
  report.p_value = static_cast<double>(report.rank_of_obs) / static_cast<double>(spec.L);
  return report;
}

}  // namespace

std::unique_ptr<McScenario> make_scenario(const std::string& id) {
  if (id == "gamma_shape") return std::make_unique<GammaShapeScenario>();
  if (id == "gamma_scale") return std::make_unique<GammaScaleScenario>();
  if (id == "parabola_variance") return std::make_unique<ParabolaVarianceScenario>();
  throw ConfigError("unknown mc-test scenario '" + id + "'");
}

std::size_t mc_rank(double t_obs, std::span<const double> sims, Tail tail, Rng& tie_rng) {
  std::size_t more_extreme = 0, ties = 0;
  for (double s : sims) {
    if (s == t_obs) {
      ++ties;
    } else if (tail == Tail::upper ? s > t_obs : s < t_obs) {
      ++more_extreme;
    }
  }
  // ties are broken uniformly, preserving the uniform-rank property
  std::size_t tie_above = ties > 0 ? tie_rng.uniform_index(ties + 1) : 0;
  return 1 + more_extreme + tie_above;
}

McTestReport run_conditional_test(const McScenario& scenario, const McTestSpec& spec,
                                  const McDataset& data, std::uint64_t seed) {
  return run_test(scenario, spec, data, seed, TestMethod::conditional);
}

McTestReport run_bootstrap_test(const McScenario& scenario, const McTestSpec& spec,
                                const McDataset& data, std::uint64_t seed) {
  return run_test(scenario, spec, data, seed, TestMethod::bootstrap);
}

PowerCurve power_curve(const McScenario& scenario, const McTestSpec& spec,
                       std::span<const double> theta_grid,
                       std::span<const double> alpha_grid,
                       std::size_t datasets_per_theta, double eta_true,
                       TestMethod method, std::uint64_t seed, unsigned jobs) {
  validate_spec(spec);
  if (theta_grid.empty() || alpha_grid.empty())
    throw std::invalid_argument("power_curve requires nonempty grids");

  const std::size_t jobs_total = theta_grid.size() * datasets_per_theta;
  std::vector<double> pvalues(jobs_total);

  parallel_for(jobs_total, jobs, [&](std::size_t job) {
    const std::size_t ti = job / datasets_per_theta;
    const std::size_t d = job % datasets_per_theta;
    Rng data_rng = stream_rng(seed, "mc.data", ti, d);
    const McDataset data = scenario.generate(theta_grid[ti], eta_true, spec.n, data_rng);
    const McTestReport r =
        run_test(scenario, spec, data, derive_stream(seed, "mc.test", ti, d), method);
    pvalues[job] = r.p_value;
  });

  PowerCurve curve;
  for (std::size_t ti = 0; ti < theta_grid.size(); ++ti) {
    for (double alpha : alpha_grid) {
      std::size_t rejected = 0;
      for (std::size_t d = 0; d < datasets_per_theta; ++d) {
        if (pvalues[ti * datasets_per_theta + d] <= alpha + 1e-12) ++rejected;
      }
      curve.rows.push_back({theta_grid[ti], alpha,
                            static_cast<double>(rejected) /
                                static_cast<double>(datasets_per_theta),
                            datasets_per_theta, method});
    }
  }
  return curve;
}

}  // namespace condinf
