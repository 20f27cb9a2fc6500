#ifndef CONDINF_CONDMLE_HPP
#define CONDINF_CONDMLE_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "condinf/mctest.hpp"
#include "condinf/numerics.hpp"

namespace condinf {

struct ProfilePoint {
  double theta = 0.0;
  double eta_hat = 0.0;
  double log_cond_lik = 0.0;    // proxy conditional log-likelihood of the first k coords
  double log_uncond_lik = 0.0;  // plug-in unconditional log-likelihood (comparator)
  double nr_start = 0.0;
  bool mle_failed = false;      // row flagged; profile continues
};

// Interest-parameter profile problem: how to fit the nuisance at fixed theta
// and evaluate the two likelihoods on the observed data.
class ProfileModel {
 public:
  virtual ~ProfileModel() = default;
  virtual std::string name() const = 0;
  virtual double fit_nuisance(const McDataset& data, double theta,
                              double nr_start) const = 0;
  virtual double log_conditional(const McDataset& data, double theta, double eta,
                                 std::size_t k) const = 0;
  virtual double log_unconditional(const McDataset& data, double theta,
                                   double eta) const = 0;
};

// parabola: theta = sigma², nuisance psi, conditioning on (Σx, Σy); the
// conditional likelihood factorizes over the two independent chains.
// gamma_shape: theta = shape, nuisance scale, conditioning on Σx.
// normal_variance: theta = sigma², nuisance mean, conditioning on Σx.
std::unique_ptr<ProfileModel> make_profile_model(const std::string& id);

// Deterministic profile over theta_grid: no sampling, density evaluation
// only. Rows where the nuisance fit diverges are flagged and skipped.
std::vector<ProfilePoint> conditional_profile(const ProfileModel& model,
                                              const McDataset& data, std::size_t k,
                                              std::span<const double> theta_grid,
                                              double nr_start);

struct CondMleResult {
  double theta_hat;
  std::vector<ProfilePoint> profile;
};

// Golden-section refinement of the grid argmax of the conditional profile.
// Throws FlatProfile when the profile's range is numerical noise, which
// signals that the conditioning statistic removed the interest parameter.
CondMleResult conditional_mle(const ProfileModel& model, const McDataset& data,
                              std::size_t k, Bracket search_interval, double nr_start,
                              std::size_t grid_points = 41);

}  // namespace condinf

#endif
