#ifndef CONDINF_RAOBLACKWELL_HPP
#define CONDINF_RAOBLACKWELL_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "condinf/families.hpp"
#include "condinf/proxy.hpp"

namespace condinf {

// A statistic of the first `arity` coordinates to be Rao-Blackwellised by
// conditioning on the total statistic.
struct EstimatorSpec {
  std::size_t arity;
  std::function<double(std::span<const double>)> map;
  std::string label;
};

// Monte Carlo estimate of E(est | U_{1,n} = u_total): the average of est over
// inner_reps independent proxy draws of length est.arity. Inner replicate j
// draws from stream_rng(seed, "rb.inner", j), so the result is a fixed
// function of the seed set regardless of evaluation order (up to summation
// reassociation).
double rao_blackwellise(const EstimatorSpec& est, const TiltableFamily& family,
                        double u_total, std::size_t n, std::size_t inner_reps,
                        std::uint64_t seed, SamplerStats* stats = nullptr);

struct RBRow {
  std::size_t k = 0;
  double var_raw = 0.0;
  double var_rb = 0.0;
  double se_raw = 0.0;  // jackknife over outer replicates
  double se_rb = 0.0;
  std::size_t outer_reps = 0;
  std::size_t inner_reps = 0;
  long aborts = 0;
  bool degenerate = false;  // outer_reps < 2: variances are NaN
};

struct RBStudyReport {
  std::vector<RBRow> rows;  // sorted by k
};

// Variance study: for each k, simulate outer_reps datasets under the family's
// reference parameter, then compare the across-dataset variance of the raw
// estimator with the variance of its Rao-Blackwellised version.
RBStudyReport run_variance_study(
    const TiltableFamily& family,
    const std::function<EstimatorSpec(std::size_t)>& estimator_for_k, std::size_t n,
    std::span<const std::size_t> k_grid, std::size_t outer_reps,
    std::size_t inner_reps, std::uint64_t seed, unsigned jobs = 0);

// Sample variance and its delete-one jackknife standard error.
struct VarianceEstimate {
  double variance;
  double se;
};
VarianceEstimate variance_with_jackknife(std::span<const double> values);

}  // namespace condinf

#endif
