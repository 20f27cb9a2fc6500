#ifndef CONDINF_MCTEST_HPP
#define CONDINF_MCTEST_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "condinf/nuisance.hpp"
#include "condinf/proxy.hpp"

namespace condinf {

enum class TestMethod { conditional, bootstrap };
enum class Tail { upper, lower };

std::string to_string(TestMethod m);
std::string to_string(Tail t);

// Observations of one dataset; y is populated only by paired scenarios.
struct McDataset {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t size() const { return x.size(); }
};

// One H0 test problem: how to simulate data, compute the interest statistic,
// eliminate the nuisance, and draw the two kinds of replicates.
class McScenario {
 public:
  virtual ~McScenario() = default;
  virtual std::string name() const = 0;
  virtual McDataset generate(double theta, double eta, std::size_t n, Rng& rng) const = 0;
  virtual double observed_stat(const McDataset& data, std::size_t k) const = 0;
  virtual double fit_nuisance(const McDataset& data, double theta0,
                              double nr_start) const = 0;
  // one conditional replicate: length-k proxy draw(s) given the data's
  // conditioning statistic(s) under (theta0, eta_hat)
  virtual double conditional_stat(const McDataset& data, double theta0, double eta_hat,
                                  std::size_t k, Rng& rng, SamplerStats* stats) const = 0;
  // one parametric-bootstrap replicate: k unconditional draws from the fitted model
  virtual double bootstrap_stat(double theta0, double eta_hat, std::size_t k,
                                Rng& rng) const = 0;
};

std::unique_ptr<McScenario> make_scenario(const std::string& id);

struct McTestSpec {
  std::size_t n = 100;
  std::size_t k = 80;
  std::size_t L = 100;
  double theta0 = 1.0;
  double nr_start = 1.0;
  Tail tail = Tail::upper;
};

struct McTestReport {
  double t_obs = 0.0;
  std::vector<double> simulated;  // t_2..t_L
  std::size_t rank_of_obs = 0;    // rank in the rejection direction, 1 = most extreme
  double p_value = 1.0;           // rank / L, on the grid {1/L, ..., 1}
  TestMethod method = TestMethod::conditional;
  long aborts = 0;
  double eta_hat = 0.0;
};

// Rank-based Monte Carlo test of H0: theta = theta0 with the nuisance
// replaced by its constrained MLE. The L-1 replicates for simulation index l
// draw from stream_rng(seed, "mc.sim", l) for both methods, so conditional
// and bootstrap runs with the same seed are paired.
McTestReport run_conditional_test(const McScenario& scenario, const McTestSpec& spec,
                                  const McDataset& data, std::uint64_t seed);
McTestReport run_bootstrap_test(const McScenario& scenario, const McTestSpec& spec,
                                const McDataset& data, std::uint64_t seed);

struct PowerRow {
  double theta;
  double alpha;
  double power;
  std::size_t reps;
  TestMethod method;
};

struct PowerCurve {
  std::vector<PowerRow> rows;  // theta-major, alpha-minor order
};

// Rejection frequency of the H0: theta = theta0 test across datasets
// generated under each theta in the grid (nuisance fixed at eta_true).
PowerCurve power_curve(const McScenario& scenario, const McTestSpec& spec,
                       std::span<const double> theta_grid,
                       std::span<const double> alpha_grid,
                       std::size_t datasets_per_theta, double eta_true,
                       TestMethod method, std::uint64_t seed, unsigned jobs = 0);

// Randomized-tie rank of t_obs among {t_obs} ∪ sims in the rejection
// direction. Exposed for the rank-arithmetic tests.
std::size_t mc_rank(double t_obs, std::span<const double> sims, Tail tail, Rng& tie_rng);

}  // namespace condinf

#endif
