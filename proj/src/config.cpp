#include "fairx/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fairx {

using nlohmann::json;

MeritFunction MeritSpec::make(const Interval& domain) const {
  if (kind == "exp") return MeritFunction::exponential(c, domain);
  if (kind == "identity") {
    Interval dom = domain;
    if (!(dom.lo > 0.0)) dom.lo = 1e-9;  // identity merit needs a positive domain
    if (!(dom.hi > dom.lo)) dom.hi = dom.lo + 1.0;
    return MeritFunction::identity(dom);
  }
  if (kind == "pwl") return MeritFunction::piecewise_linear(L, domain);
  throw std::invalid_argument("merit kind must be exp|identity|pwl, got '" + kind + "'");
}

double MeritSpec::tag() const {
  if (kind == "exp") return c;
  if (kind == "pwl") return L;
  return 1.0;
}

namespace {

// Read a field if present, requiring the JSON type to match the default's.
template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config field '") + key + "': " + e.what());
  }
}

void check_known_keys(const json& j, const std::set<std::string>& known,
                      const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

json merit_to_json(const MeritSpec& m) {
  const MeritSpec def;
  json j{{"kind", m.kind}};
  if (m.c != def.c) j["c"] = m.c;
  if (m.L != def.L) j["L"] = m.L;
  return j;
}

MeritSpec merit_from_json(const json& j) {
  check_known_keys(j, {"kind", "c", "L"}, "merit");
  MeritSpec m;
  read(j, "kind", m.kind);
  read(j, "c", m.c);
  read(j, "L", m.L);
  return m;
}

json noise_to_json(const NoiseSpec& n) {
  // emit only fields that differ from defaults so that serialization is
  // lossless: parse(serialize(x)) == x for every config value
  const NoiseSpec def;
  json j{{"kind", n.kind}};
  if (n.sigma != def.sigma) j["sigma"] = n.sigma;
  if (n.halfwidth != def.halfwidth) j["halfwidth"] = n.halfwidth;
  return j;
}

NoiseSpec noise_from_json(const json& j) {
  check_known_keys(j, {"kind", "sigma", "halfwidth"}, "env.noise");
  NoiseSpec n;
  read(j, "kind", n.kind);
  read(j, "sigma", n.sigma);
  read(j, "halfwidth", n.halfwidth);
  return n;
}

json env_to_json(const EnvSpec& e) {
  const EnvSpec def;
  json j{{"type", e.type}};
  if (e.means != def.means) j["means"] = e.means;
  if (e.noise.kind != def.noise.kind || e.noise.sigma != def.noise.sigma ||
      e.noise.halfwidth != def.noise.halfwidth)
    j["noise"] = noise_to_json(e.noise);
  if (e.dataset != def.dataset) j["dataset"] = e.dataset;
  if (e.rff_dim != def.rff_dim) j["rff_dim"] = e.rff_dim;
  if (e.rff_sigma != def.rff_sigma) j["rff_sigma"] = e.rff_sigma;
  if (e.num_arms != def.num_arms) j["num_arms"] = e.num_arms;
  if (e.dim != def.dim) j["dim"] = e.dim;
  if (e.noise_sigma != def.noise_sigma) j["noise_sigma"] = e.noise_sigma;
  if (e.theta_star != def.theta_star) j["theta_star"] = e.theta_star;
  if (e.theta_seed != def.theta_seed) j["theta_seed"] = e.theta_seed;
  if (e.theta_norm != def.theta_norm) j["theta_norm"] = e.theta_norm;
  if (e.log != def.log) j["log"] = e.log;
  if (e.validation_log != def.validation_log) j["validation_log"] = e.validation_log;
  return j;
}

EnvSpec env_from_json(const json& j) {
  check_known_keys(j,
                   {"type", "means", "noise", "dataset", "rff_dim", "rff_sigma", "num_arms",
                    "dim", "noise_sigma", "theta_star", "theta_seed", "theta_norm", "log",
                    "validation_log"},
                   "env");
  EnvSpec e;
  read(j, "type", e.type);
  read(j, "means", e.means);
  if (j.contains("noise")) e.noise = noise_from_json(j.at("noise"));
  read(j, "dataset", e.dataset);
  read(j, "rff_dim", e.rff_dim);
  read(j, "rff_sigma", e.rff_sigma);
  read(j, "num_arms", e.num_arms);
  read(j, "dim", e.dim);
  read(j, "noise_sigma", e.noise_sigma);
  read(j, "theta_star", e.theta_star);
  read(j, "theta_seed", e.theta_seed);
  read(j, "theta_norm", e.theta_norm);
  read(j, "log", e.log);
  read(j, "validation_log", e.validation_log);
  return e;
}

json algo_to_json(const AlgoSpec& a) {
  json j{{"name", a.name}};
  if (!a.params.empty()) j["params"] = a.params;
  if (!a.grid.empty()) j["grid"] = a.grid;
  if (a.beta_schedule) j["beta_schedule"] = true;
  return j;
}

AlgoSpec algo_from_json(const json& j) {
  check_known_keys(j, {"name", "params", "grid", "beta_schedule"}, "algo");
  AlgoSpec a;
  read(j, "name", a.name);
  read(j, "params", a.params);
  read(j, "grid", a.grid);
  read(j, "beta_schedule", a.beta_schedule);
  return a;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (horizon < 0) throw std::runtime_error("config: horizon must be >= 0");
  if (num_seeds < 1) throw std::runtime_error("config: num_seeds must be >= 1");
  if (std::abs(split.validation + split.test - 1.0) > 1e-9)
    throw std::runtime_error("config: split fractions must sum to 1");
  if (split.validation < 0.0 || split.test <= 0.0)
    throw std::runtime_error("config: bad split fractions");
  if (num_checkpoints < 1) throw std::runtime_error("config: num_checkpoints must be >= 1");
  if (exposure_basis != "policy" && exposure_basis != "pulls")
    throw std::runtime_error("config: exposure_basis must be policy|pulls");
  if (oracle != "auto" && oracle != "known" && oracle != "empirical" &&
      oracle != "least_squares")
    throw std::runtime_error("config: oracle must be auto|known|empirical|least_squares");
  if (!(pgd.step_size > 0.0) || pgd.num_steps < 1)
    throw std::runtime_error("config: bad pgd settings");
  for (long r : checkpoint_rounds)
    if (r < 1 || r > horizon) throw std::runtime_error("config: checkpoint round out of range");
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  check_known_keys(j,
                   {"name", "env", "merit", "algo", "horizon", "num_seeds", "master_seed",
                    "split", "num_checkpoints", "checkpoint_rounds", "pgd", "exposure_basis",
                    "oracle", "output_dir"},
                   "config root");
  ExperimentConfig cfg;
  read(j, "name", cfg.name);
  if (j.contains("env")) cfg.env = env_from_json(j.at("env"));
  if (j.contains("merit")) cfg.merit = merit_from_json(j.at("merit"));
  if (j.contains("algo")) cfg.algo = algo_from_json(j.at("algo"));
  read(j, "horizon", cfg.horizon);
  read(j, "num_seeds", cfg.num_seeds);
  read(j, "master_seed", cfg.master_seed);
  if (j.contains("split")) {
    check_known_keys(j.at("split"), {"validation", "test"}, "split");
    read(j.at("split"), "validation", cfg.split.validation);
    read(j.at("split"), "test", cfg.split.test);
  }
  read(j, "num_checkpoints", cfg.num_checkpoints);
  read(j, "checkpoint_rounds", cfg.checkpoint_rounds);
  if (j.contains("pgd")) {
    check_known_keys(j.at("pgd"), {"lr", "steps"}, "pgd");
    read(j.at("pgd"), "lr", cfg.pgd.step_size);
    read(j.at("pgd"), "steps", cfg.pgd.num_steps);
  }
  read(j, "exposure_basis", cfg.exposure_basis);
  read(j, "oracle", cfg.oracle);
  read(j, "output_dir", cfg.output_dir);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["env"] = env_to_json(cfg.env);
  j["merit"] = merit_to_json(cfg.merit);
  j["algo"] = algo_to_json(cfg.algo);
  j["horizon"] = cfg.horizon;
  j["num_seeds"] = cfg.num_seeds;
  j["master_seed"] = cfg.master_seed;
  j["split"] = json{{"validation", cfg.split.validation}, {"test", cfg.split.test}};
  j["num_checkpoints"] = cfg.num_checkpoints;
  if (!cfg.checkpoint_rounds.empty()) j["checkpoint_rounds"] = cfg.checkpoint_rounds;
  j["pgd"] = json{{"lr", cfg.pgd.step_size}, {"steps", cfg.pgd.num_steps}};
  j["exposure_basis"] = cfg.exposure_basis;
  j["oracle"] = cfg.oracle;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

std::string apply_override(const std::string& json_text, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::runtime_error("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);

  json doc = json::parse(json_text);
  json* node = &doc;
  std::stringstream ps(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ps, part, '.')) parts.push_back(part);
  for (const auto& p : parts) {
    if (!node->is_object() || !node->contains(p))
      throw std::runtime_error("override: no such config key '" + path + "'");
    node = &node->at(p);
  }

  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::exception&) {
    value = value_text;  // bare words are strings
  }
  const bool both_numbers = node->is_number() && value.is_number();
  if (!both_numbers && node->type() != value.type())
    throw std::runtime_error("override: type mismatch for '" + path + "' (expected " +
                             std::string(node->type_name()) + ")");
  *node = value;
  return doc.dump(2) + "\n";
}

}  // namespace fairx
