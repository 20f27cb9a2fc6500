#ifndef CONDINF_EXPERIMENTS_HPP
#define CONDINF_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "condinf/config.hpp"
#include "condinf/families.hpp"

namespace condinf {

struct RunOutcome {
  std::vector<std::string> outputs;  // file names inside the out directory
  long aborts = 0;
  std::vector<std::string> warnings;
  std::vector<TypicalityNote> typicality;
  bool ok = true;  // oracle-check verdict; other experiments always true
};

// Experiment drivers behind the CLI subcommands. Each writes its CSV outputs
// into cfg.common.out and returns what the manifest needs. Identical config
// and seed produce byte-identical CSVs regardless of the jobs count.
RunOutcome cmd_sufficiency_scan(const ScanConfig& cfg);
RunOutcome cmd_rao_blackwell(const RaoBlackwellConfig& cfg);
RunOutcome cmd_mc_test(const McTestConfig& cfg);
RunOutcome cmd_power(const PowerConfig& cfg);
RunOutcome cmd_condmle_profile(const CondMleConfig& cfg);
RunOutcome cmd_oracle_check(const OracleConfig& cfg);

// The member evaluated at one sweep point of a sufficiency scan. For the
// inverse-Gaussian lambda sweep this moves the canonical coordinate paired
// with the reciprocal statistic while holding the other canonical coordinate
// fixed, i.e. mu co-moves as mu_T·sqrt(lambda/lambda_T).
std::unique_ptr<TiltableFamily> swept_member(const FamilyConfig& family,
                                             const std::string& parameter, double value);

// Exact conditional law of the first coordinate of an i.i.d. unit-exponential
// sample given the total sum: reference oracle used by oracle-check.
double exponential_conditional_density(double x, double s, std::size_t n);
double exponential_conditional_cdf(double x, double s, std::size_t n);
double exponential_conditional_quantile(double p, double s, std::size_t n);

}  // namespace condinf

#endif
