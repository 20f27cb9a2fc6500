#include "condinf/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "condinf/errors.hpp"
#include "condinf/version.hpp"

namespace condinf {

namespace {

using nlohmann::json;

json parse_document(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return j;
}

// Tracks which keys were consumed so unknown fields are rejected.
class Checker {
 public:
  Checker(const json& j, std::string scope) : j_(j), scope_(std::move(scope)) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(scope_ + ": missing required field '" + key + "'");
    return j_.at(key);
  }

  double num(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(scope_ + ": field '" + key + "' must be a number");
    return v.get<double>();
  }
  double num_or(const std::string& key, double dflt) {
    return has(key) ? num(key) : dflt;
  }
  std::size_t count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
      throw ConfigError(scope_ + ": field '" + key + "' must be a positive integer");
    return v.get<std::size_t>();
  }
  std::size_t count_or(const std::string& key, std::size_t dflt) {
    return has(key) ? count(key) : dflt;
  }
  std::string str(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(scope_ + ": field '" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::string str_or(const std::string& key, const std::string& dflt) {
    return has(key) ? str(key) : dflt;
  }
  bool flag_or(const std::string& key, bool dflt) {
    if (!has(key)) return dflt;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(scope_ + ": field '" + key + "' must be a boolean");
    return v.get<bool>();
  }
  std::vector<double> num_array(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array() || v.empty())
      throw ConfigError(scope_ + ": field '" + key + "' must be a nonempty array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number())
        throw ConfigError(scope_ + ": field '" + key + "' must contain numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<std::size_t> count_array(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array() || v.empty())
      throw ConfigError(scope_ + ": field '" + key + "' must be a nonempty array");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_unsigned() || e.get<std::uint64_t>() == 0)
        throw ConfigError(scope_ + ": field '" + key + "' must contain positive integers");
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }
  const json& object(const std::string& key) {
    const json& v = at(key);
    if (!v.is_object()) throw ConfigError(scope_ + ": field '" + key + "' must be an object");
    return v;
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw ConfigError(scope_ + ": unknown field '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string scope_;
  std::set<std::string> seen_;
};

std::map<std::string, double> number_map(const json& j, const std::string& scope) {
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number())
      throw ConfigError(scope + ": parameter '" + it.key() + "' must be a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

json merged_with_overrides(const std::string& text, const Overrides& o) {
  json j = parse_document(text);
  if (o.seed) j["seed"] = *o.seed;
  if (o.out) j["out"] = *o.out;
  if (o.jobs) j["jobs"] = *o.jobs;
  if (o.k) j["k"] = *o.k;
  if (o.quiet) j["quiet"] = *o.quiet;
  return j;
}

CommonConfig common_fields(Checker& c) {
  CommonConfig common;
  const json& seed = c.at("seed");
  if (!seed.is_number_unsigned()) throw ConfigError("'seed' must be an unsigned integer");
  common.seed = seed.get<std::uint64_t>();
  common.out = c.str_or("out", "out");
  common.jobs = c.has("jobs") ? static_cast<unsigned>(c.count("jobs")) : 0;
  common.quiet = c.flag_or("quiet", false);
  return common;
}

FamilyConfig family_fields(Checker& c) {
  FamilyConfig f;
  const json& fam = c.object("family");
  Checker fc(fam, "family");
  f.id = fc.str("id");
  f.statistic = fc.str_or("statistic", "sum");
  if (fc.has("params")) f.params = number_map(fc.object("params"), "family.params");
  fc.finish();
  for (const auto& [key, value] : f.params) {
    if (!(value > 0.0) && key != "mean")
      throw ConfigError("family parameter '" + key + "' must be positive");
  }
  return f;
}

std::string echo_of(const json& j) { return j.dump(2) + "\n"; }

std::string validate_choice(const std::string& value, std::set<std::string> allowed,
                            const std::string& field) {
  if (!allowed.count(value)) {
    std::string msg = "field '" + field + "': '" + value + "' is not one of {";
    bool first = true;
    for (const auto& a : allowed) {
      if (!first) msg += ", ";
      msg += a;
      first = false;
    }
    throw ConfigError(msg + "}");
  }
  return value;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScanConfig parse_scan_config(const std::string& text, const Overrides& o,
                             std::string* echo) {
  const json j = merged_with_overrides(text, o);
  Checker c(j, "sufficiency-scan");
  ScanConfig cfg;
  cfg.common = common_fields(c);
  cfg.family = family_fields(c);
  cfg.n = c.count("n");
  cfg.k = c.count("k");
  if (cfg.k + 1 > cfg.n) throw ConfigError("requires k <= n-1");

  const json& sw = c.object("sweep");
  Checker sc(sw, "sweep");
  cfg.sweep.parameter = sc.str("parameter");
  cfg.sweep.points = sc.count_or("points", 50);
  if (sc.has("lo")) cfg.sweep.lo = sc.num("lo");
  if (sc.has("hi")) cfg.sweep.hi = sc.num("hi");
  sc.finish();
  c.finish();

  static const std::map<std::pair<std::string, std::string>, std::string> kAllowed = {
      {{"gamma", "sum"}, "scale"},
      {{"gamma", "sum_log"}, "shape"},
      {{"inverse_gaussian", "sum"}, "mu"},
      {{"inverse_gaussian", "sum_reciprocal"}, "lambda"},
      {{"exponential", "sum"}, "rate"},
      {{"normal", "sum"}, "mean"},
  };
  auto it = kAllowed.find({cfg.family.id, cfg.family.statistic});
  if (it == kAllowed.end() || it->second != cfg.sweep.parameter)
    throw ConfigError("unsupported scan: family '" + cfg.family.id + "' with statistic '" +
                      cfg.family.statistic + "' sweeping '" + cfg.sweep.parameter + "'");
  if (echo) *echo = echo_of(j);
  return cfg;
}

RaoBlackwellConfig parse_rao_blackwell_config(const std::string& text, const Overrides& o,
                                              std::string* echo) {
  const json j = merged_with_overrides(text, o);
  Checker c(j, "rao-blackwell");
  RaoBlackwellConfig cfg;
  cfg.common = common_fields(c);
  cfg.family = family_fields(c);
  validate_choice(cfg.family.id, {"gamma", "normal"}, "family.id");
  cfg.n = c.count("n");
  cfg.k_grid = c.count_array("k_grid");
  cfg.outer_reps = c.count_or("outer_reps", 500);
  cfg.inner_reps = c.count_or("inner_reps", 1000);
  c.finish();
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
    if (cfg.k_grid[i] < 2 || cfg.k_grid[i] + 2 > cfg.n)
      throw ConfigError("k_grid entries must lie in [2, n-2]");
    if (i > 0 && cfg.k_grid[i] <= cfg.k_grid[i - 1])
      throw ConfigError("k_grid must be strictly increasing");
  }
  if (echo) *echo = echo_of(j);
  return cfg;
}

namespace {
void validate_truth(const std::string& scenario, const std::map<std::string, double>& t) {
  auto need = [&](const char* key) {
    if (!t.count(key))
      throw ConfigError("truth for scenario '" + scenario + "' needs field '" + key + "'");
    const bool sign_free = std::string(key) == "psi" || std::string(key) == "mean";
    if (!sign_free && !(t.at(key) > 0.0))
      throw ConfigError(std::string("truth field '") + key + "' must be positive");
  };
  if (scenario == "gamma_shape" || scenario == "gamma_scale") {
    need("shape");
    need("scale");
    if (t.size() != 2) throw ConfigError("truth for gamma scenarios is {shape, scale}");
  } else if (scenario == "parabola_variance" || scenario == "parabola") {
    need("psi");
    need("sigma2");
    if (t.size() != 2) throw ConfigError("truth for parabola is {psi, sigma2}");
  } else if (scenario == "normal_variance") {
    need("mean");
    need("variance");
    if (t.size() != 2) throw ConfigError("truth for normal_variance is {mean, variance}");
  }
}
}  // namespace

McTestConfig parse_mc_test_config(const std::string& text, const Overrides& o,
                                  std::string* echo) {
  const json j = merged_with_overrides(text, o);
  Checker c(j, "mc-test");
  McTestConfig cfg;
  cfg.common = common_fields(c);
  cfg.scenario = validate_choice(c.str("scenario"),
                                 {"gamma_shape", "gamma_scale", "parabola_variance"},
                                 "scenario");
  cfg.truth = number_map(c.object("truth"), "truth");
  validate_truth(cfg.scenario, cfg.truth);
  cfg.theta0 = c.num("theta0");
  if (!(cfg.theta0 > 0.0)) throw ConfigError("theta0 must be positive");
  cfg.n = c.count("n");
  cfg.k = c.count("k");
  cfg.L = c.count("L");
  cfg.datasets = c.count_or("datasets", 1);
  cfg.method = validate_choice(c.str_or("method", "conditional"),
                               {"conditional", "bootstrap", "both"}, "method");
  cfg.nr_start = c.num("nr_start");
  cfg.tail = validate_choice(c.str_or("tail", "upper"), {"upper", "lower"}, "tail");
  c.finish();
  if (cfg.L < 20) throw ConfigError("L must be at least 20");
  if (cfg.k < 2 || cfg.k + 2 > cfg.n) throw ConfigError("requires 2 <= k <= n-2");
  if (echo) *echo = echo_of(j);
  return cfg;
}

PowerConfig parse_power_config(const std::string& text, const Overrides& o,
                               std::string* echo) {
  const json j = merged_with_overrides(text, o);
  Checker c(j, "power");
  PowerConfig cfg;
  cfg.common = common_fields(c);
  cfg.scenario = validate_choice(c.str("scenario"),
                                 {"gamma_shape", "gamma_scale", "parabola_variance"},
                                 "scenario");
  cfg.truth = number_map(c.object("truth"), "truth");
  validate_truth(cfg.scenario, cfg.truth);
  cfg.theta0 = c.num("theta0");
  if (!(cfg.theta0 > 0.0)) throw ConfigError("theta0 must be positive");
  cfg.n = c.count("n");
  cfg.k = c.count("k");
  cfg.L = c.count("L");
  cfg.datasets_per_theta = c.count_or("datasets_per_theta", 500);
  cfg.method = validate_choice(c.str_or("method", "both"),
                               {"conditional", "bootstrap", "both"}, "method");
  cfg.nr_start = c.num("nr_start");
  cfg.tail = validate_choice(c.str_or("tail", "upper"), {"upper", "lower"}, "tail");
  cfg.theta_grid = c.num_array("theta_grid");
  cfg.alpha_grid = c.num_array("alpha_grid");
  c.finish();
  if (cfg.L < 20) throw ConfigError("L must be at least 20");
  if (cfg.k < 2 || cfg.k + 2 > cfg.n) throw ConfigError("requires 2 <= k <= n-2");
  for (std::size_t i = 1; i < cfg.theta_grid.size(); ++i)
    if (cfg.theta_grid[i] <= cfg.theta_grid[i - 1])
      throw ConfigError("theta_grid must be strictly increasing");
  for (std::size_t i = 0; i < cfg.alpha_grid.size(); ++i) {
    if (!(cfg.alpha_grid[i] > 0.0 && cfg.alpha_grid[i] < 1.0))
      throw ConfigError("alpha_grid entries must lie in (0,1)");
    if (i > 0 && cfg.alpha_grid[i] <= cfg.alpha_grid[i - 1])
      throw ConfigError("alpha_grid must be strictly increasing");
  }
  if (echo) *echo = echo_of(j);
  return cfg;
}

CondMleConfig parse_condmle_config(const std::string& text, const Overrides& o,
                                   std::string* echo) {
  const json j = merged_with_overrides(text, o);
  Checker c(j, "condmle-profile");
  CondMleConfig cfg;
  cfg.common = common_fields(c);
  cfg.scenario = validate_choice(c.str("scenario"),
                                 {"parabola", "gamma_shape", "normal_variance"},
                                 "scenario");
  cfg.truth = number_map(c.object("truth"), "truth");
  validate_truth(cfg.scenario, cfg.truth);
  cfg.n = c.count("n");
  cfg.k = c.count("k");
  cfg.theta_grid = c.num_array("theta_grid");
  cfg.nr_starts = c.num_array("nr_starts");
  cfg.refine = c.flag_or("refine", true);
  c.finish();
  if (cfg.k + 1 > cfg.n) throw ConfigError("requires k <= n-1");
  for (std::size_t i = 1; i < cfg.theta_grid.size(); ++i)
    if (cfg.theta_grid[i] <= cfg.theta_grid[i - 1])
      throw ConfigError("theta_grid must be strictly increasing");
  for (double th : cfg.theta_grid)
    if (!(th > 0.0)) throw ConfigError("theta_grid entries must be positive");
  if (echo) *echo = echo_of(j);
  return cfg;
}

OracleConfig parse_oracle_config(const std::string& text, const Overrides& o,
                                 std::string* echo) {
  const json j = merged_with_overrides(text, o);
  Checker c(j, "oracle-check");
  OracleConfig cfg;
  cfg.common = common_fields(c);
  if (c.has("n_grid")) cfg.n_grid = c.count_array("n_grid");
  cfg.draws = c.count_or("draws", 10000);
  if (c.has("u_total")) cfg.u_total = c.num("u_total");
  c.finish();
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] < 5) throw ConfigError("n_grid entries must be at least 5");
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1])
      throw ConfigError("n_grid must be strictly increasing");
  }
  if (cfg.draws < 100) throw ConfigError("draws must be at least 100");
  if (echo) *echo = echo_of(j);
  return cfg;
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  json j;
  j["experiment"] = m.experiment;
  j["config"] = json::parse(m.config_echo);
  j["version"] = m.version.empty() ? CONDINF_VERSION_STRING : m.version;
  j["wall_time_seconds"] = m.wall_time_seconds;
  j["outputs"] = m.outputs;
  j["aborts"] = m.aborts;
  j["warnings"] = m.warnings;
  json typ = json::array();
  for (const auto& t : m.typicality) {
    typ.push_back({{"context", t.context},
                   {"lil_ratio", t.lil_ratio},
                   {"flag", t.atypical ? "atypical" : "ok"}});
  }
  j["typicality"] = typ;
  j["timestamp"] = m.timestamp;

  namespace fs = std::filesystem;
  const fs::path target = fs::path(dir) / "manifest.json";
  const fs::path tmp = fs::path(dir) / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, target);
}

}  // namespace condinf
