#ifndef CONDINF_CONFIG_HPP
#define CONDINF_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace condinf {

struct CommonConfig {
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned jobs = 0;  // 0 = hardware parallelism
  bool quiet = false;
};

struct FamilyConfig {
  std::string id;
  std::string statistic = "sum";
  std::map<std::string, double> params;
};

struct SweepConfig {
  std::string parameter;
  std::size_t points = 50;
  std::optional<double> lo;  // defaults to truth/3
  std::optional<double> hi;  // defaults to 3·truth
};

struct ScanConfig {
  CommonConfig common;
  FamilyConfig family;
  std::size_t n = 100;
  std::size_t k = 80;
  SweepConfig sweep;
};

struct RaoBlackwellConfig {
  CommonConfig common;
  FamilyConfig family;
  std::size_t n = 100;
  std::vector<std::size_t> k_grid;
  std::size_t outer_reps = 500;
  std::size_t inner_reps = 1000;
};

struct McTestConfig {
  CommonConfig common;
  std::string scenario;
  std::map<std::string, double> truth;
  double theta0 = 0.0;
  std::size_t n = 100, k = 80, L = 100, datasets = 1;
  std::string method = "conditional";  // conditional | bootstrap | both
  double nr_start = 1.0;
  std::string tail = "upper";
};

struct PowerConfig {
  CommonConfig common;
  std::string scenario;
  std::map<std::string, double> truth;  // eta_true plus defaults for reporting
  double theta0 = 0.0;
  std::size_t n = 100, k = 80, L = 100, datasets_per_theta = 500;
  std::string method = "both";
  double nr_start = 1.0;
  std::string tail = "upper";
  std::vector<double> theta_grid;
  std::vector<double> alpha_grid;
};

struct CondMleConfig {
  CommonConfig common;
  std::string scenario;
  std::map<std::string, double> truth;
  std::size_t n = 100, k = 99;
  std::vector<double> theta_grid;
  std::vector<double> nr_starts;
  bool refine = true;
};

struct OracleConfig {
  CommonConfig common;
  std::vector<std::size_t> n_grid = {20, 50, 100, 200};
  std::size_t draws = 10000;
  std::optional<double> u_total;  // deliberate conditioning override
};

// CLI flag overrides applied on top of the config document before validation;
// the manifest echoes the merged result.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  std::optional<std::size_t> k;
  std::optional<bool> quiet;
};

// Parse + validate a config document for one experiment. Validation is
// total: unknown fields, missing required fields, and out-of-range values
// all throw ConfigError before any computation starts. `echo` receives the
// canonical (key-sorted) JSON text of the merged config.
ScanConfig parse_scan_config(const std::string& json_text, const Overrides& o,
                             std::string* echo = nullptr);
RaoBlackwellConfig parse_rao_blackwell_config(const std::string& json_text,
                                              const Overrides& o,
                                              std::string* echo = nullptr);
McTestConfig parse_mc_test_config(const std::string& json_text, const Overrides& o,
                                  std::string* echo = nullptr);
PowerConfig parse_power_config(const std::string& json_text, const Overrides& o,
                               std::string* echo = nullptr);
CondMleConfig parse_condmle_config(const std::string& json_text, const Overrides& o,
                                   std::string* echo = nullptr);
OracleConfig parse_oracle_config(const std::string& json_text, const Overrides& o,
                                 std::string* echo = nullptr);

std::string read_text_file(const std::string& path);

struct TypicalityNote {
  std::string context;
  double lil_ratio;
  bool atypical;
};

struct RunManifest {
  std::string experiment;
  std::string config_echo;  // canonical JSON
  std::string version;
  double wall_time_seconds = 0.0;
  std::vector<std::string> outputs;
  long aborts = 0;
  std::vector<std::string> warnings;
  std::vector<TypicalityNote> typicality;
  std::string timestamp;  // the one field outside the byte-reproducibility contract
};

// Written to <dir>/manifest.json via a temp file + rename.
void write_manifest(const std::string& dir, const RunManifest& manifest);

}  // namespace condinf

#endif
