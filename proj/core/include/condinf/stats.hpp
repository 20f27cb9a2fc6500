#ifndef CONDINF_STATS_HPP
#define CONDINF_STATS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace condinf {

// Kolmogorov-Smirnov distance of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Asymptotic Kolmogorov tail probability with the Stephens small-sample
// correction factor.
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) *
                        std::exp(-2.0 * j * j * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

// Upper-tail probability of a chi-squared variable.
inline double chi2_upper_tail(double x, double df) {
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

inline double sample_mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Empirical quantile (linear interpolation) of an unsorted sample.
inline double empirical_quantile(std::vector<double> sample, double q) {
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sample.size()) return sample.back();
  const double w = pos - static_cast<double>(i);
  return sample[i] * (1.0 - w) + sample[i + 1] * w;
}

// Empirical total variation between two samples over equal-probability bins
// of the pooled range (bin edges from the first sample's quantiles).
inline double empirical_total_variation(std::span<const double> a,
                                        std::span<const double> b,
                                        std::size_t bins = 10) {
  std::vector<double> edges(bins - 1);
  std::vector<double> ref(a.begin(), a.end());
  for (std::size_t i = 0; i + 1 < bins; ++i)
    edges[i] = empirical_quantile(ref, static_cast<double>(i + 1) / static_cast<double>(bins));
  auto histogram = [&](std::span<const double> s) {
    std::vector<double> h(bins, 0.0);
    for (double x : s) {
      const std::size_t bin =
          std::upper_bound(edges.begin(), edges.end(), x) - edges.begin();
      h[bin] += 1.0 / static_cast<double>(s.size());
    }
    return h;
  };
  const std::vector<double> ha = histogram(a);
  const std::vector<double> hb = histogram(b);
  double tv = 0.0;
  for (std::size_t i = 0; i < bins; ++i) tv += std::abs(ha[i] - hb[i]);
  return 0.5 * tv;
}

}  // namespace condinf

#endif
