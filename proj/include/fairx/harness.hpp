#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairx/algos.hpp"
#include "fairx/config.hpp"
#include "fairx/envs.hpp"
#include "fairx/oracle.hpp"

namespace fairx {

// ---------------------------------------------------------------------------
// single runs
// ---------------------------------------------------------------------------

struct RunSpec {
  long horizon = 0;
  std::vector<long> checkpoints;  // ascending, within [1, horizon]
  bool exposure_by_pulls = false;
};

struct RunResult {
  int seed_index = 0;
  std::vector<long> checkpoint_rounds;
  std::vector<double> fr_at;  // cumulative fairness regret at checkpoints
  std::vector<double> rr_at;  // cumulative reward regret at checkpoints
  double final_fr = 0.0;
  double final_rr = 0.0;
  std::vector<double> avg_exposure;
  std::vector<double> avg_optimal_exposure;
  std::vector<long> pull_counts;
  long rounds_completed = 0;
  bool truncated = false;  // replay log ran out before the horizon
  double wall_seconds = 0.0;
};

// 50 log-spaced checkpoint rounds by default.
std::vector<long> default_checkpoints(long horizon, int count = 50);

// One seeded interaction loop: contexts -> select -> regret vs oracle ->
// sample arm -> reward -> update.
RunResult run_once(const RunSpec& spec, BanditAlgorithm& algo, BanditEnv& env,
                   const FairOracle& oracle, Rng& rng);

// Replay variant: only events whose logged arm matches the sampled arm count
// as rounds; everything else is skipped without updating the algorithm.
RunResult run_once_replay(const RunSpec& spec, BanditAlgorithm& algo, const ReplayLog& log,
                          const FairOracle& oracle, Rng& rng);

// ---------------------------------------------------------------------------
// aggregation
// ---------------------------------------------------------------------------

struct Aggregate {
  std::vector<long> checkpoint_rounds;
  std::vector<double> fr_mean, fr_std;
  std::vector<double> rr_mean, rr_std;
  double final_fr_mean = 0.0, final_fr_std = 0.0;
  double final_rr_mean = 0.0, final_rr_std = 0.0;
};

// Mean and sample standard deviation (n-1; 0 when n=1) per checkpoint.
Aggregate aggregate(const std::vector<RunResult>& results);

// ---------------------------------------------------------------------------
// experiment driver
// ---------------------------------------------------------------------------

enum class SplitTag { Validation, Test };

using AlgoFactory = std::function<std::unique_ptr<BanditAlgorithm>(
    const AlgoSpec& algo, const std::map<std::string, double>& params, const AlgoShape& shape,
    const std::optional<MeritFunction>& merit, const PgdConfig& pgd)>;

AlgoFactory default_algo_factory();

/// Immutable per-split experiment blueprint: environment prototype (or
/// replay log), fitted oracle, and shapes. Built once, shared by every run.
struct ExperimentContext {
  ExperimentConfig cfg;
  SplitTag tag = SplitTag::Test;
  std::shared_ptr<const MultilabelDataset> dataset;  // full data, when used
  std::vector<int> split_rows;
  std::shared_ptr<const RffContextModel> rff;
  std::shared_ptr<const ReplayLog> replay;
  std::unique_ptr<BanditEnv> env_proto;  // null for replay
  std::optional<FairOracle> oracle;
  std::optional<MeritFunction> merit;
  AlgoShape shape;

  bool is_replay() const { return replay != nullptr; }
};

ExperimentContext build_context(const ExperimentConfig& cfg, SplitTag tag);

struct ExperimentOutputs {
  std::vector<RunResult> runs;
  Aggregate agg;
};

// num_seeds runs of one algorithm configuration on the split's environment;
// seeds are independent streams derived from the master seed.
ExperimentOutputs run_experiment(const ExperimentContext& ctx,
                                 const std::map<std::string, double>& params, int threads,
                                 const AlgoFactory& factory = default_algo_factory(),
                                 std::uint64_t grid_index = 0);

// ---------------------------------------------------------------------------
// grid search
// ---------------------------------------------------------------------------

struct GridRow {
  std::map<std::string, double> params;
  double fr_mean = 0.0;
  double rr_mean = 0.0;
};

struct GridSearchResult {
  std::map<std::string, double> best;
  std::vector<GridRow> table;  // canonical enumeration order
};

// Evaluates every grid point on the validation split with num_seeds runs
// each; minimizes mean final fairness regret, ties broken by mean reward
// regret, then by enumeration order.
GridSearchResult grid_search(const ExperimentConfig& cfg, int threads,
                             const AlgoFactory& factory = default_algo_factory());

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

struct CsvMeta {
  std::string algo;
  std::string env;
  double merit_tag = 0.0;
  long horizon = 0;
};

void write_traces_csv(std::ostream& out, const std::vector<RunResult>& runs, const CsvMeta& meta);
void write_exposure_csv(std::ostream& out, const std::vector<RunResult>& runs,
                        const CsvMeta& meta);
void write_summary_csv(std::ostream& out, const Aggregate& agg, const CsvMeta& meta);
void write_grid_csv(std::ostream& out, const GridSearchResult& grid);

// traces.csv, exposure.csv, summary.csv under dir (created if needed).
void write_experiment_outputs(const std::string& dir, const ExperimentConfig& cfg,
                              const ExperimentOutputs& outputs);

// ---------------------------------------------------------------------------
// parallel runs
// ---------------------------------------------------------------------------

// Runs fn(0..n-1) on up to `threads` workers; results must be written into
// preassigned slots so scheduling cannot reorder anything observable.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace fairx
