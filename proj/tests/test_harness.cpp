#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fairx/harness.hpp"

using namespace fairx;

namespace {

const std::string kTmp = std::string(FAIRX_SOURCE_DIR) + "/build";

std::string write_tmp(const std::string& name, const std::string& text) {
  const std::string path = kTmp + "/" + name;
  std::ofstream f(path);
  f << text;
  return path;
}

ExperimentConfig bernoulli_config(std::vector<double> means, const std::string& algo,
                                  std::map<std::string, double> params, long horizon,
                                  int seeds, double merit_c) {
  ExperimentConfig cfg;
  cfg.name = "test";
  cfg.env.type = "mab_means";
  cfg.env.means = std::move(means);
  cfg.env.noise.kind = "bernoulli";
  cfg.merit.kind = "exp";
  cfg.merit.c = merit_c;
  cfg.algo.name = algo;
  cfg.algo.params = std::move(params);
  cfg.horizon = horizon;
  cfg.num_seeds = seeds;
  cfg.master_seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("default checkpoints are log-spaced and end at the horizon") {
  const auto cps = default_checkpoints(100000, 50);
  CHECK(cps.front() == 1);
  CHECK(cps.back() == 100000);
  CHECK(cps.size() <= 50);
  for (std::size_t i = 1; i < cps.size(); ++i) CHECK(cps[i] > cps[i - 1]);
  CHECK(default_checkpoints(0, 50).empty());
  CHECK(default_checkpoints(1, 50) == std::vector<long>{1});
}

TEST_CASE("run_once with the oracle's own policy has zero fairness regret") {
  const auto exp2 = MeritFunction::exponential(2.0);
  const std::vector<double> means{0.2, 0.8};
  const auto oracle = FairOracle::known_params(exp2, means, false);
  MabEnv env(MabInstance(means, RewardNoise::bernoulli()));
  FixedPolicyAlgorithm algo(oracle.optimal_policy());
  Rng rng = derive_rng({101});
  RunSpec spec{1000, default_checkpoints(1000, 10), false};
  const RunResult res = run_once(spec, algo, env, oracle, rng);
  CHECK(res.final_fr == doctest::Approx(0.0));
  CHECK(res.rounds_completed == 1000);
  for (int a = 0; a < 2; ++a)
    CHECK(res.avg_exposure[a] == doctest::Approx(oracle.optimal_policy().probs[a]));
}

TEST_CASE("point mass on the worst arm accrues (4/3) per round") {
  const auto ident = MeritFunction::identity({0.5, 2.5});
  const std::vector<double> means{1.0, 2.0};  // pi* = (1/3, 2/3)
  const auto oracle = FairOracle::known_params(ident, means, false);
  MabEnv env(MabInstance(means, RewardNoise::gaussian(0.1)));
  FixedPolicyAlgorithm algo(Policy::point_mass(2, 0));
  Rng rng = derive_rng({102});
  const long horizon = 300;
  RunSpec spec{horizon, {horizon}, false};
  const RunResult res = run_once(spec, algo, env, oracle, rng);
  CHECK(res.final_fr == doctest::Approx(4.0 / 3.0 * horizon).epsilon(1e-9));
}

TEST_CASE("zero-horizon runs produce an empty trace") {
  const auto exp2 = MeritFunction::exponential(2.0);
  const std::vector<double> means{0.2, 0.8};
  const auto oracle = FairOracle::known_params(exp2, means, false);
  MabEnv env(MabInstance(means, RewardNoise::bernoulli()));
  FixedPolicyAlgorithm algo(Policy::uniform(2));
  Rng rng = derive_rng({103});
  RunSpec spec{0, {}, false};
  const RunResult res = run_once(spec, algo, env, oracle, rng);
  CHECK(res.rounds_completed == 0);
  CHECK(res.final_fr == doctest::Approx(0.0));
  CHECK(res.checkpoint_rounds.empty());
}

TEST_CASE("aggregate mean and sample standard deviation") {
  RunResult a, b;
  a.checkpoint_rounds = b.checkpoint_rounds = {10};
  a.fr_at = {1.0};
  b.fr_at = {3.0};
  a.rr_at = {0.5};
  b.rr_at = {0.5};
  a.final_fr = 1.0;
  b.final_fr = 3.0;
  a.final_rr = b.final_rr = 0.5;

  const Aggregate single = aggregate({a});
  CHECK(single.fr_mean[0] == doctest::Approx(1.0));
  CHECK(single.fr_std[0] == doctest::Approx(0.0));  // defined as 0 for n = 1

  const Aggregate both = aggregate({a, b});
  CHECK(both.fr_mean[0] == doctest::Approx(2.0));
  CHECK(both.fr_std[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(both.rr_std[0] == doctest::Approx(0.0));

  const Aggregate same = aggregate({a, a, a});
  CHECK(same.fr_std[0] == doctest::Approx(0.0));

  RunResult misaligned = b;
  misaligned.checkpoint_rounds = {20};
  CHECK_THROWS_AS(aggregate({a, misaligned}), std::invalid_argument);
}

TEST_CASE("experiment runs are reproducible and thread-count independent") {
  ExperimentConfig cfg =
      bernoulli_config({0.3, 0.5, 0.7}, "fairx_ts",
                       {{"prior_mean", 0.5}, {"prior_std", 1.0}, {"reward_std", 0.5}}, 2000, 4,
                       4.0);
  const ExperimentContext ctx = build_context(cfg, SplitTag::Test);
  auto csv_of = [&](int threads) {
    const ExperimentOutputs out = run_experiment(ctx, {}, threads);
    std::ostringstream traces, exposure, summary;
    const CsvMeta meta{cfg.algo.name, cfg.name, cfg.merit.tag(), cfg.horizon};
    write_traces_csv(traces, out.runs, meta);
    write_exposure_csv(exposure, out.runs, meta);
    write_summary_csv(summary, out.agg, meta);
    return traces.str() + exposure.str() + summary.str();
  };
  const std::string once = csv_of(1);
  CHECK(once == csv_of(1));
  CHECK(once == csv_of(3));
  CHECK(once.find("round,fr_cum,rr_cum,seed,algo,env,merit_c") == 0);
}

TEST_CASE("sublinear vs linear fairness regret growth") {
  // 5-arm Bernoulli with close means and a steep merit: the fair policy
  // keeps every arm sampled, so fairness regret grows like sqrt(T); the
  // winner-takes-all baseline accrues a constant distance per round
  const std::vector<double> means{0.40, 0.45, 0.50, 0.55, 0.60};
  const long horizon = 40000;

  ExperimentConfig ts_cfg = bernoulli_config(
      means, "fairx_ts", {{"prior_mean", 0.5}, {"prior_std", 1.0}, {"reward_std", 0.5}},
      horizon, 10, 10.0);
  ts_cfg.checkpoint_rounds = {horizon / 4, horizon};
  const ExperimentOutputs ts_out =
      run_experiment(build_context(ts_cfg, SplitTag::Test), {}, 1);
  const double ts_ratio = ts_out.agg.fr_mean[1] / ts_out.agg.fr_mean[0];
  CHECK(ts_ratio <= 2.5);

  ExperimentConfig ucb_cfg =
      bernoulli_config(means, "ucb", {{"alpha", 0.5}}, horizon, 10, 10.0);
  ucb_cfg.checkpoint_rounds = {horizon / 4, horizon};
  const ExperimentOutputs ucb_out =
      run_experiment(build_context(ucb_cfg, SplitTag::Test), {}, 1);
  const double ucb_ratio = ucb_out.agg.fr_mean[1] / ucb_out.agg.fr_mean[0];
  CHECK(ucb_ratio >= 3.5);
}

TEST_CASE("grid search selects the zero-regret policy and is reproducible") {
  const auto exp2 = MeritFunction::exponential(2.0);
  const std::vector<double> means{0.25, 0.75};
  ExperimentConfig cfg = bernoulli_config(means, "fixed", {}, 500, 3, 2.0);
  cfg.algo.grid = {{"which", {0.0, 1.0, 2.0}}};

  // param "which" picks among point-mass-0, the oracle policy, point-mass-1
  const auto oracle_policy = FairOracle::known_params(exp2, means, false).optimal_policy();
  AlgoFactory factory = [&](const AlgoSpec&, const std::map<std::string, double>& params,
                            const AlgoShape& shape, const std::optional<MeritFunction>&,
                            const PgdConfig&) -> std::unique_ptr<BanditAlgorithm> {
    const int which = static_cast<int>(params.at("which"));
    if (which == 1) return std::make_unique<FixedPolicyAlgorithm>(oracle_policy);
    return std::make_unique<FixedPolicyAlgorithm>(
        Policy::point_mass(shape.num_arms, which == 0 ? 0 : 1));
  };
  const GridSearchResult res = grid_search(cfg, 1, factory);
  CHECK(res.best.at("which") == doctest::Approx(1.0));
  CHECK(res.table.size() == 3);

  // singleton grid returns its only point
  ExperimentConfig single = cfg;
  single.algo.grid = {{"which", {2.0}}};
  CHECK(grid_search(single, 1, factory).best.at("which") == doctest::Approx(2.0));

  // stochastic grid choice is stable across reruns with the same seeds
  ExperimentConfig tune = bernoulli_config({0.3, 0.5, 0.7}, "fairx_ucb", {}, 800, 3, 4.0);
  tune.algo.grid = {{"alpha", {0.01, 0.1}}};
  const auto first = grid_search(tune, 1);
  const auto second = grid_search(tune, 1);
  CHECK(first.best == second.best);
  REQUIRE(first.table.size() == second.table.size());
  for (std::size_t i = 0; i < first.table.size(); ++i) {
    CHECK(first.table[i].fr_mean == doctest::Approx(second.table[i].fr_mean));
    CHECK(first.table[i].rr_mean == doctest::Approx(second.table[i].rr_mean));
  }
}

TEST_CASE("replay runs stop at the log end and get flagged") {
  ReplayLog log;
  log.num_arms = 2;
  log.dim = 0;
  log.uniform_logging = true;
  Rng gen = derive_rng({104});
  for (int i = 0; i < 60; ++i) {
    ReplayEvent ev;
    ev.timestamp = i;
    ev.logged_arm = static_cast<int>(gen() % 2);
    ev.reward = draw_uniform(gen) < 0.5 ? 1.0 : 0.0;
    log.events.push_back(ev);
  }
  const auto exp2 = MeritFunction::exponential(2.0);
  const auto oracle = FairOracle::empirical_means(exp2, log);
  FixedPolicyAlgorithm algo(Policy::uniform(2));
  Rng rng = derive_rng({105});
  RunSpec spec{1000, {1000}, false};
  const RunResult res = run_once_replay(spec, algo, log, oracle, rng);
  CHECK(res.truncated);
  CHECK(res.rounds_completed < 1000);
  CHECK(res.rounds_completed > 0);

  // a horizon below the matched-event count is not truncated
  RunSpec tiny{5, {5}, false};
  Rng rng2 = derive_rng({106});
  const RunResult ok = run_once_replay(tiny, algo, log, oracle, rng2);
  CHECK_FALSE(ok.truncated);
  CHECK(ok.rounds_completed == 5);
}

TEST_CASE("build_context wires each environment type") {
  // dataset-backed MAB and linear environments share the split machinery
  std::ostringstream data;
  Rng gen = derive_rng({107});
  for (int i = 0; i < 40; ++i) {
    const int label = 1 + static_cast<int>(gen() % 3);
    data << label << " 1:" << draw_uniform(gen) << " 2:" << draw_uniform(gen) << "\n";
  }
  const std::string data_path = write_tmp("harness_dataset.svm", data.str());

  ExperimentConfig cfg;
  cfg.env.type = "mab_dataset";
  cfg.env.dataset = data_path;
  cfg.merit.kind = "exp";
  cfg.merit.c = 2.0;
  cfg.algo.name = "fairx_ts";
  cfg.horizon = 50;
  cfg.num_seeds = 2;
  const ExperimentContext val = build_context(cfg, SplitTag::Validation);
  const ExperimentContext test = build_context(cfg, SplitTag::Test);
  CHECK(val.split_rows.size() + test.split_rows.size() == 40);
  CHECK(val.split_rows.size() == 8);  // 20% validation
  for (int r : val.split_rows)
    CHECK(std::find(test.split_rows.begin(), test.split_rows.end(), r) ==
          test.split_rows.end());
  CHECK(run_experiment(test, {}, 1).runs.size() == 2);

  cfg.env.type = "linear_dataset";
  cfg.env.rff_dim = 6;
  cfg.algo.name = "fairx_lints";
  const ExperimentContext lin = build_context(cfg, SplitTag::Test);
  CHECK(lin.shape.dim == 6);
  CHECK(lin.oracle->is_linear());
  CHECK(run_experiment(lin, {}, 1).runs.size() == 2);

  cfg.env.type = "linear_dataset_wellspec";
  const ExperimentContext ws = build_context(cfg, SplitTag::Test);
  CHECK(ws.oracle->mode() == OracleMode::KnownParams);
  CHECK(run_experiment(ws, {}, 1).runs.size() == 2);

  // synthetic linear with a drawn parameter
  ExperimentConfig syn;
  syn.env.type = "linear_synthetic";
  syn.env.num_arms = 4;
  syn.env.dim = 3;
  syn.env.noise_sigma = 0.1;
  syn.merit.kind = "exp";
  syn.merit.c = 2.0;
  syn.algo.name = "fairx_lints";
  syn.horizon = 50;
  syn.num_seeds = 2;
  const ExperimentContext synctx = build_context(syn, SplitTag::Test);
  Eigen::Map<const Eigen::VectorXd> theta(synctx.oracle->fitted_params().data(), 3);
  CHECK(theta.norm() <= 1.0 + 1e-12);
  CHECK(run_experiment(synctx, {}, 1).runs.size() == 2);

  // replay: prefix split and the uniform-logging guard
  ReplayLog log;
  log.num_arms = 2;
  log.dim = 0;
  log.uniform_logging = true;
  for (int i = 0; i < 50; ++i) {
    ReplayEvent ev;
    ev.timestamp = i;
    ev.logged_arm = i % 2;
    ev.reward = (i % 4) == 0 ? 1.0 : 0.0;
    log.events.push_back(ev);
  }
  const std::string log_path = kTmp + "/harness_replay.log";
  log.save(log_path);
  ExperimentConfig rep;
  rep.env.type = "replay";
  rep.env.log = log_path;
  rep.merit.kind = "exp";
  rep.merit.c = 2.0;
  rep.algo.name = "fairx_ts";
  rep.horizon = 10;
  rep.num_seeds = 2;
  const ExperimentContext rval = build_context(rep, SplitTag::Validation);
  const ExperimentContext rtest = build_context(rep, SplitTag::Test);
  CHECK(rval.replay->events.size() == 10);
  CHECK(rtest.replay->events.size() == 40);
  CHECK(run_experiment(rtest, {}, 1).runs.size() == 2);

  log.uniform_logging = false;
  log.save(log_path);
  CHECK_THROWS_AS(build_context(rep, SplitTag::Test), std::runtime_error);
}

TEST_CASE("exposure accounting basis flag") {
  ExperimentConfig cfg = bernoulli_config({0.2, 0.8}, "fairx_ts", {}, 400, 2, 4.0);
  cfg.exposure_basis = "pulls";
  const ExperimentOutputs out = run_experiment(build_context(cfg, SplitTag::Test), {}, 1);
  for (const auto& run : out.runs) {
    double sum = 0.0;
    for (std::size_t a = 0; a < run.avg_exposure.size(); ++a) {
      CHECK(run.avg_exposure[a] ==
            doctest::Approx(static_cast<double>(run.pull_counts[a]) / run.rounds_completed));
      sum += run.avg_exposure[a];
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("identity merit rejects non-positive reference means") {
  ExperimentConfig cfg = bernoulli_config({0.0, 0.5}, "fairx_ts", {}, 100, 1, 1.0);
  cfg.merit.kind = "identity";
  CHECK_THROWS_AS(build_context(cfg, SplitTag::Test), std::runtime_error);
  cfg.env.means = {0.25, 0.5};
  CHECK(build_context(cfg, SplitTag::Test).merit->kind() == MeritKind::Identity);
}

TEST_CASE("declared arm counts must match the dataset") {
  std::ostringstream data;
  for (int i = 0; i < 20; ++i) data << (1 + i % 3) << " 1:" << 0.1 * i << "\n";
  const std::string path = write_tmp("harness_arms.svm", data.str());
  ExperimentConfig cfg;
  cfg.env.type = "mab_dataset";
  cfg.env.dataset = path;
  cfg.env.num_arms = 5;  // dataset has 3 label columns
  cfg.merit.kind = "exp";
  cfg.merit.c = 2.0;
  cfg.algo.name = "fairx_ts";
  cfg.horizon = 10;
  cfg.num_seeds = 1;
  CHECK_THROWS_AS(build_context(cfg, SplitTag::Test), std::runtime_error);
  cfg.env.num_arms = 3;
  CHECK(build_context(cfg, SplitTag::Test).shape.num_arms == 3);
}

TEST_CASE("experiments with truncated replay runs aggregate the common prefix") {
  ReplayLog log;
  log.num_arms = 2;
  log.dim = 0;
  log.uniform_logging = true;
  Rng gen = derive_rng({108});
  for (int i = 0; i < 120; ++i) {
    ReplayEvent ev;
    ev.timestamp = i;
    ev.logged_arm = static_cast<int>(gen() % 2);
    ev.reward = draw_uniform(gen) < 0.4 ? 1.0 : 0.0;
    log.events.push_back(ev);
  }
  const std::string path = kTmp + "/harness_truncated.log";
  log.save(path);

  ExperimentConfig cfg;
  cfg.env.type = "replay";
  cfg.env.log = path;
  cfg.merit.kind = "exp";
  cfg.merit.c = 2.0;
  cfg.algo.name = "fairx_ts";
  cfg.horizon = 500;  // far more than the log can match
  cfg.num_seeds = 3;
  cfg.checkpoint_rounds = {10, 20, 500};
  const ExperimentOutputs out = run_experiment(build_context(cfg, SplitTag::Test), {}, 1);
  for (const auto& run : out.runs) CHECK(run.truncated);
  CHECK(out.agg.checkpoint_rounds.size() == 2);  // 500 never reached
  CHECK(out.agg.checkpoint_rounds.back() == 20);
  CHECK(out.agg.final_fr_mean > 0.0);
}

TEST_CASE("tuned fair policies beat the conventional baseline on dataset exposure") {
  // the headline comparison on the committed sample data: tune on the
  // validation split, report fairness regret on the test split
  ExperimentConfig cfg;
  cfg.name = "sample_headline";
  cfg.env.type = "mab_dataset";
  cfg.env.dataset = std::string(FAIRX_SOURCE_DIR) + "/data/sample_multilabel.svm";
  cfg.merit.kind = "exp";
  cfg.merit.c = 6.0;
  cfg.horizon = 8000;
  cfg.num_seeds = 5;
  cfg.master_seed = 11;
  cfg.checkpoint_rounds = {8000};

  cfg.algo.name = "fairx_ts";
  cfg.algo.grid = {{"prior_std", {0.1, 1.0}}, {"reward_std", {0.1, 0.5}}};
  const auto fair_best = grid_search(cfg, 1).best;
  const ExperimentOutputs fair =
      run_experiment(build_context(cfg, SplitTag::Test), fair_best, 1);

  cfg.algo.name = "ts";
  const auto base_best = grid_search(cfg, 1).best;
  const ExperimentOutputs base =
      run_experiment(build_context(cfg, SplitTag::Test), base_best, 1);

  CHECK(fair.agg.final_fr_mean * 5.0 < base.agg.final_fr_mean);
  // and the fair policy's average exposure tracks the reference allocation
  for (const auto& run : fair.runs) {
    double l1 = 0.0;
    for (std::size_t a = 0; a < run.avg_exposure.size(); ++a)
      l1 += std::abs(run.avg_exposure[a] - run.avg_optimal_exposure[a]);
    CHECK(l1 <= 0.25);
  }
}
