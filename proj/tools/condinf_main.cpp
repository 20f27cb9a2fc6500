// Experiment runner: every study is a subcommand taking a JSON config, a
// seed, and an output directory, and leaves behind CSV files plus a run
// manifest. Identical config + seed reproduce the CSVs byte for byte.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "condinf/config.hpp"
#include "condinf/errors.hpp"
#include "condinf/experiments.hpp"
#include "condinf/version.hpp"

namespace {

using condinf::Overrides;
using condinf::RunManifest;
using condinf::RunOutcome;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitOracle = 3;

struct SubcommandArgs {
  std::string config_path;
  Overrides overrides;
};

void add_common_flags(CLI::App* cmd, SubcommandArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file")->required();
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t v) { args.overrides.seed = v; }, "override seed");
  cmd->add_option_function<std::string>(
      "--out", [&args](const std::string& v) { args.overrides.out = v; },
      "override output directory");
  cmd->add_option_function<unsigned>(
      "--jobs", [&args](unsigned v) { args.overrides.jobs = v; },
      "worker pool size (default: hardware)");
  cmd->add_option_function<std::size_t>(
      "--k", [&args](std::size_t v) { args.overrides.k = v; }, "override run length k");
  cmd->add_flag_function(
      "--quiet", [&args](std::int64_t) { args.overrides.quiet = true; },
      "suppress progress output");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Parse, run, time, and write the manifest for one experiment.
template <typename Config>
int run_experiment(const std::string& name, const SubcommandArgs& args,
                   Config (*parse)(const std::string&, const Overrides&, std::string*),
                   RunOutcome (*run)(const Config&)) {
  std::string echo;
  Config cfg;
  try {
    cfg = parse(condinf::read_text_file(args.config_path), args.overrides, &echo);
  } catch (const condinf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  try {
    outcome = run(cfg);
  } catch (const condinf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  RunManifest manifest;
  manifest.experiment = name;
  manifest.config_echo = echo;
  manifest.version = CONDINF_VERSION_STRING;
  manifest.wall_time_seconds = elapsed.count();
  manifest.outputs = outcome.outputs;
  manifest.aborts = outcome.aborts;
  manifest.warnings = outcome.warnings;
  manifest.typicality = outcome.typicality;
  manifest.timestamp = utc_timestamp();
  condinf::write_manifest(cfg.common.out, manifest);

  if (!cfg.common.quiet) {
    std::fprintf(stdout, "%s: wrote %zu output file(s) to %s (%.2fs", name.c_str(),
                 outcome.outputs.size(), cfg.common.out.c_str(), elapsed.count());
    if (outcome.aborts > 0) std::fprintf(stdout, ", %ld aborts", outcome.aborts);
    std::fprintf(stdout, ")\n");
    for (const auto& w : outcome.warnings)
      std::fprintf(stdout, "  warning: %s\n", w.c_str());
  }
  if (name == "oracle-check" && !outcome.ok) return kExitOracle;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional inference experiments: co-sufficient sampling, "
               "Rao-Blackwellisation, Monte Carlo tests, conditional likelihood"};
  app.set_version_flag("--version", CONDINF_VERSION_STRING);
  app.require_subcommand(1);

  SubcommandArgs args[6];
  std::function<int()> runner;

  auto* scan = app.add_subcommand("sufficiency-scan",
                                  "proxy log-likelihood flatness across a parameter sweep");
  add_common_flags(scan, args[0]);
  scan->callback([&runner, &args]() {
    runner = [&args]() {
      return run_experiment<condinf::ScanConfig>("sufficiency-scan", args[0],
                                                 condinf::parse_scan_config,
                                                 condinf::cmd_sufficiency_scan);
    };
  });

  auto* rb = app.add_subcommand("rao-blackwell",
                                "variance study of Rao-Blackwellised estimators");
  add_common_flags(rb, args[1]);
  rb->callback([&runner, &args]() {
    runner = [&args]() {
      return run_experiment<condinf::RaoBlackwellConfig>(
          "rao-blackwell", args[1], condinf::parse_rao_blackwell_config,
          condinf::cmd_rao_blackwell);
    };
  });

  auto* mc = app.add_subcommand("mc-test", "conditional / bootstrap Monte Carlo tests");
  add_common_flags(mc, args[2]);
  mc->callback([&runner, &args]() {
    runner = [&args]() {
      return run_experiment<condinf::McTestConfig>("mc-test", args[2],
                                                   condinf::parse_mc_test_config,
                                                   condinf::cmd_mc_test);
    };
  });

  auto* power = app.add_subcommand("power", "power curves across a parameter grid");
  add_common_flags(power, args[3]);
  power->callback([&runner, &args]() {
    runner = [&args]() {
      return run_experiment<condinf::PowerConfig>("power", args[3],
                                                  condinf::parse_power_config,
                                                  condinf::cmd_power);
    };
  });

  auto* profile = app.add_subcommand("condmle-profile",
                                     "conditional likelihood profiles in the interest "
                                     "parameter");
  add_common_flags(profile, args[4]);
  profile->callback([&runner, &args]() {
    runner = [&args]() {
      return run_experiment<condinf::CondMleConfig>("condmle-profile", args[4],
                                                    condinf::parse_condmle_config,
                                                    condinf::cmd_condmle_profile);
    };
  });

  auto* oracle = app.add_subcommand("oracle-check",
                                    "exact-conditional oracle suites and cumulant "
                                    "cross-checks");
  add_common_flags(oracle, args[5]);
  oracle->callback([&runner, &args]() {
    runner = [&args]() {
      return run_experiment<condinf::OracleConfig>("oracle-check", args[5],
                                                   condinf::parse_oracle_config,
                                                   condinf::cmd_oracle_check);
    };
  });

  CLI11_PARSE(app, argc, argv);
  return runner ? runner() : kExitConfig;
}
