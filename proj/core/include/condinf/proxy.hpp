#ifndef CONDINF_PROXY_HPP
#define CONDINF_PROXY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "condinf/families.hpp"
#include "condinf/rng.hpp"

namespace condinf {

// Per-step quantities of the recursive conditional proxy. Step 0 is the pure
// tilted density at m_0 = u_total/n; steps i >= 1 carry the Gaussian factor
// n(alpha·beta, beta, u(x)) with beta = s²_i (n-i-1) and
// alpha = t_i + mu3_i / (2 s²_i² (n-i-1)).
struct StepRecord {
  std::size_t index = 0;
  double m_i = 0.0;
  double t_i = 0.0;
  double s2_i = 0.0;
  double mu3_i = 0.0;
  double beta = 0.0;         // NaN on the tilted step
  double alpha_shift = 0.0;  // NaN on the tilted step
  double log_ci = 0.0;       // NaN until the normalizer is needed
  bool tilted_step = false;
  std::optional<GaussStep> gauss;  // closed form when the family provides one
};

struct TypicalityReport {
  double lil_ratio = 0.0;
  bool atypical = false;  // lil_ratio > 3: outside the iterated-logarithm range
};

struct SamplerStats {
  long proposals = 0;
  long accepted = 0;
  long aborts = 0;           // whole-replicate restarts after conditioning drift
  double max_ratio = 0.0;    // largest observed acceptance ratio; must stay <= 1
  double acceptance_rate() const {
    return proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals)
                         : 0.0;
  }
};

enum class StepSampler {
  acceptance_rejection,  // proposals from the family density p_{X,θ*}
  inversion,             // numeric inverse CDF, one uniform per coordinate
};

// Sequential state for evaluating or sampling the proxy density of
// (X_1,...,X_k) given the sum of u over n coordinates. Single-writer: step
// i+1 depends on the coordinates accepted so far. The family object is the
// plug-in member p_{X,θ*}; by quasi-sufficiency its parameter choice is
// immaterial for the conditioned coordinates.
class ProxyChain {
 public:
  ProxyChain(const TiltableFamily& family, double u_total, std::size_t n, std::size_t k);

  std::size_t index() const { return i_; }
  std::size_t length() const { return k_; }
  std::size_t sample_size() const { return n_; }
  bool done() const { return i_ >= k_; }
  double u_running() const { return u_running_; }
  const std::vector<StepRecord>& history() const { return history_; }

  // Prepare (and memoize) the current step's tilt solution. Throws
  // AlphaOutOfRange when the conditioning target m_i leaves the statistic's
  // mean range, which signals an atypical path.
  const StepRecord& step();

  double step_log_density(double x_next);
  double sample_step(Rng& rng, SamplerStats* stats = nullptr,
                     StepSampler sampler = StepSampler::acceptance_rejection);
  void advance(double x_next);

  // Integrates the normalized current step density; should come back as 1
  // within quadrature accuracy. Verification helper for tests.
  double step_normalizer_check(double rel_tol = 1e-10);

 private:
  double log_density_prepared(const StepRecord& rec, double x) const;
  void ensure_normalizer(StepRecord& rec);

  const TiltableFamily* family_;
  double u_total_;
  double u_running_ = 0.0;
  std::size_t n_, k_, i_ = 0;
  std::optional<StepRecord> current_;
  std::vector<StepRecord> history_;
};

// Proxy log-likelihood of the first k observed coordinates given the total
// statistic. Deterministic; density evaluation only.
double log_proxy_likelihood(const TiltableFamily& family, double u_total, std::size_t n,
                            std::span<const double> x);

// Draw a length-k run from the proxy. Conditioning drift aborts the whole
// replicate and resamples (counted in stats->aborts); a partially restarted
// chain would not have the chain law.
std::vector<double> sample_proxy(const TiltableFamily& family, double u_total,
                                 std::size_t n, std::size_t k, Rng& rng,
                                 SamplerStats* stats = nullptr,
                                 StepSampler sampler = StepSampler::acceptance_rejection,
                                 int max_restarts = 1000);

// Iterated-logarithm check of the conditioning value under the reference
// parameter. Atypical values are flagged, not rejected.
TypicalityReport check_typicality(const TiltableFamily& family, double u_total,
                                  std::size_t n);

}  // namespace condinf

#endif
