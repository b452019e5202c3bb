#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairx/merit.hpp"
#include "fairx/optim.hpp"

namespace fairx {

/// Merit family selector as it appears in config files,
/// e.g. {"kind": "exp", "c": 4.0}.
struct MeritSpec {
  std::string kind = "exp";  // exp | identity | pwl
  double c = 1.0;            // exponential steepness
  double L = 1.0;            // piecewise-linear slope

  MeritFunction make(const Interval& domain) const;
  // numeric tag written to CSV columns (c, L, or 1 for identity)
  double tag() const;
};

struct NoiseSpec {
  std::string kind = "bernoulli";  // bernoulli | gaussian | uniform
  double sigma = 1.0;
  double halfwidth = 1.0;
};

struct EnvSpec {
  // mab_means | mab_dataset | linear_synthetic | linear_dataset |
  // linear_dataset_wellspec | replay
  std::string type = "mab_means";

  std::vector<double> means;  // mab_means
  NoiseSpec noise;

  std::string dataset;  // multi-label file for *_dataset types
  int rff_dim = 50;
  double rff_sigma = 0.0;  // 0 = median heuristic

  int num_arms = 0;  // linear_synthetic
  int dim = 0;
  double noise_sigma = 0.1;
  std::vector<double> theta_star;  // empty = drawn from theta_seed
  std::uint64_t theta_seed = 7;
  double theta_norm = 0.9;

  std::string log;  // replay log (test split when validation_log given)
  std::string validation_log;
};

struct AlgoSpec {
  std::string name = "fairx_ucb";
  std::map<std::string, double> params;
  std::map<std::string, std::vector<double>> grid;
  bool beta_schedule = false;  // fairx_linucb theory mode
};

struct SplitSpec {
  double validation = 0.2;
  double test = 0.8;
};

struct ExperimentConfig {
  std::string name = "experiment";
  EnvSpec env;
  MeritSpec merit;
  AlgoSpec algo;
  long horizon = 1000;
  int num_seeds = 10;
  std::uint64_t master_seed = 1;
  SplitSpec split;
  int num_checkpoints = 50;             // log-spaced when explicit list empty
  std::vector<long> checkpoint_rounds;  // explicit checkpoints win
  PgdConfig pgd;
  std::string exposure_basis = "policy";  // policy | pulls
  std::string oracle = "auto";            // auto | known | empirical | least_squares
  std::string output_dir = "out";

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin = "<json>");
std::string serialize_config(const ExperimentConfig& cfg);

// Apply one "dotted.path=value" override onto the raw config JSON; the path
// must exist and the value must parse to the same JSON type.
std::string apply_override(const std::string& json_text, const std::string& assignment);

}  // namespace fairx
