#include "condinf/raoblackwell.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "condinf/errors.hpp"
#include "condinf/parallel.hpp"

namespace condinf {

double rao_blackwellise(const EstimatorSpec& est, const TiltableFamily& family,
                        double u_total, std::size_t n, std::size_t inner_reps,
                        std::uint64_t seed, SamplerStats* stats) {
  if (inner_reps < 1) throw std::invalid_argument("inner_reps must be >= 1");
  if (est.arity > n - 1)
    throw std::invalid_argument("estimator arity exceeds the chain length bound n-1");

  double sum = 0.0;
  for (std::size_t j = 0; j < inner_reps; ++j) {
    Rng rng = stream_rng(seed, "rb.inner", j);
    const std::vector<double> draw =
        sample_proxy(family, u_total, n, est.arity, rng, stats);
    sum += est.map(draw);
  }
  return sum / static_cast<double>(inner_reps);
}

VarianceEstimate variance_with_jackknife(std::span<const double> values) {
  const std::size_t r = values.size();
  if (r < 2)
    return {std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN()};

  double s1 = 0.0, s2 = 0.0;
  for (double v : values) {
    s1 += v;
    s2 += v * v;
  }
  const double rr = static_cast<double>(r);
  const double var = (s2 - s1 * s1 / rr) / (rr - 1.0);
  if (r == 2) return {var, std::numeric_limits<double>::quiet_NaN()};

  // delete-one variances from the same running sums
  double mean_loo = 0.0;
  std::vector<double> loo(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double v = values[i];
    const double m1 = s1 - v;
    loo[i] = (s2 - v * v - m1 * m1 / (rr - 1.0)) / (rr - 2.0);
    mean_loo += loo[i];
  }
  mean_loo /= rr;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  return {var, std::sqrt((rr - 1.0) / rr * ss)};
}

RBStudyReport run_variance_study(
    const TiltableFamily& family,
    const std::function<EstimatorSpec(std::size_t)>& estimator_for_k, std::size_t n,
    std::span<const std::size_t> k_grid, std::size_t outer_reps,
    std::size_t inner_reps, std::uint64_t seed, unsigned jobs) {
  const std::size_t nk = k_grid.size();
  std::vector<std::vector<double>> raw(nk, std::vector<double>(outer_reps));
  std::vector<std::vector<double>> rb(nk, std::vector<double>(outer_reps));
  std::vector<long> aborts(outer_reps, 0);

  parallel_for(outer_reps, jobs, [&](std::size_t r) {
    Rng data_rng = stream_rng(seed, "rb.outer", r);
    std::vector<double> data(n);
    double u_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      data[i] = family.base_sample(data_rng);
      u_total += family.statistic(data[i]);
    }
    SamplerStats stats;
    for (std::size_t ki = 0; ki < nk; ++ki) {
      const EstimatorSpec est = estimator_for_k(k_grid[ki]);
      raw[ki][r] = est.map(std::span<const double>(data).first(est.arity));
      rb[ki][r] = rao_blackwellise(est, family, u_total, n, inner_reps,
                                   derive_stream(seed, "rb.rep", r, k_grid[ki]), &stats);
    }
    aborts[r] = stats.aborts;
  });

  RBStudyReport report;
  long total_aborts = 0;
  for (long a : aborts) total_aborts += a;
  for (std::size_t ki = 0; ki < nk; ++ki) {
    const VarianceEstimate vr = variance_with_jackknife(raw[ki]);
    const VarianceEstimate vb = variance_with_jackknife(rb[ki]);
    report.rows.push_back({k_grid[ki], vr.variance, vb.variance, vr.se, vb.se,
                           outer_reps, inner_reps, total_aborts, outer_reps < 2});
  }
  return report;
}

}  // namespace condinf
