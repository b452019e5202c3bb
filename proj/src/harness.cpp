#include "fairx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fairx {

namespace {

// stream tags for deriving independent rngs from the master seed
constexpr std::uint64_t kRunStream = 0x01;
constexpr std::uint64_t kSplitStream = 0x02;
constexpr std::uint64_t kRffStream = 0x03;
constexpr std::uint64_t kThetaStream = 0x04;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::vector<long> default_checkpoints(long horizon, int count) {
  std::vector<long> out;
  if (horizon < 1) return out;
  if (count < 1) count = 1;
  const double logt = std::log(static_cast<double>(horizon));
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
    const long r = std::llround(std::exp(frac * logt));
    out.push_back(std::clamp<long>(r, 1, horizon));
  }
  out.back() = horizon;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

struct TraceRecorder {
  const RunSpec& spec;
  RegretTrace trace;
  std::vector<double> pi_star_mass;
  RunResult result;
  std::size_t next_checkpoint = 0;

  TraceRecorder(const RunSpec& s, int num_arms)
      : spec(s), trace(num_arms), pi_star_mass(num_arms, 0.0) {}

  void observe(const Policy& pi, const Policy& pi_star, std::span<const double> means,
               int arm) {
    trace.observe(pi, pi_star, means, arm);
    for (int a = 0; a < pi_star.num_arms(); ++a) pi_star_mass[a] += pi_star.probs[a];
    while (next_checkpoint < spec.checkpoints.size() &&
           trace.round == spec.checkpoints[next_checkpoint]) {
      result.checkpoint_rounds.push_back(trace.round);
      result.fr_at.push_back(trace.cum_fairness_regret);
      result.rr_at.push_back(trace.cum_reward_regret);
      ++next_checkpoint;
    }
  }

  RunResult finish() {
    result.rounds_completed = trace.round;
    result.final_fr = trace.cum_fairness_regret;
    result.final_rr = trace.cum_reward_regret;
    result.pull_counts = trace.exposure_counts;
    const int k = static_cast<int>(trace.cum_policy_mass.size());
    result.avg_exposure.assign(k, 0.0);
    result.avg_optimal_exposure.assign(k, 0.0);
    if (trace.round > 0) {
      const Policy exp_pi =
          spec.exposure_by_pulls ? average_realized_exposure(trace) : average_exposure(trace);
      result.avg_exposure = exp_pi.probs;
      for (int a = 0; a < k; ++a)
        result.avg_optimal_exposure[a] = pi_star_mass[a] / static_cast<double>(trace.round);
    }
    return std::move(result);
  }
};

}  // namespace

RunResult run_once(const RunSpec& spec, BanditAlgorithm& algo, BanditEnv& env,
                   const FairOracle& oracle, Rng& rng) {
  if (algo.num_arms() != env.num_arms())
    throw std::invalid_argument("run_once: algorithm/environment arm count mismatch");
  if (algo.needs_contexts() != env.is_linear())
    throw std::invalid_argument("run_once: algorithm/environment context mismatch");
  const auto start = std::chrono::steady_clock::now();
  TraceRecorder rec(spec, env.num_arms());

  // the MAB reference policy is round-independent; hoist it
  std::optional<Policy> fixed_pi_star;
  std::vector<double> fixed_means;
  if (!env.is_linear()) {
    fixed_pi_star = oracle.optimal_policy();
    fixed_means = oracle.means();
  }

  for (long t = 1; t <= spec.horizon; ++t) {
    const std::optional<Eigen::MatrixXd> contexts = env.begin_round(rng);
    const Policy pi = algo.select(contexts, t, rng);
    const int arm = pi.sample(rng);
    const double reward = env.pull(arm, rng);
    if (contexts) {
      const Policy round_pi_star = oracle.optimal_policy(*contexts);
      const std::vector<double> means = oracle.means(*contexts);
      rec.observe(pi, round_pi_star, means, arm);
      algo.update(arm, reward, Eigen::VectorXd(contexts->row(arm)));
    } else {
      rec.observe(pi, *fixed_pi_star, fixed_means, arm);
      algo.update(arm, reward, std::nullopt);
    }
  }
  RunResult out = rec.finish();
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RunResult run_once_replay(const RunSpec& spec, BanditAlgorithm& algo, const ReplayLog& log,
                          const FairOracle& oracle, Rng& rng) {
  if (algo.num_arms() != log.num_arms)
    throw std::invalid_argument("run_once_replay: arm count mismatch");
  if (algo.needs_contexts() && log.dim == 0)
    throw std::invalid_argument("run_once_replay: algorithm needs contexts, log has none");
  const auto start = std::chrono::steady_clock::now();
  TraceRecorder rec(spec, log.num_arms);

  std::optional<Policy> fixed_pi_star;
  std::vector<double> fixed_means;
  if (!oracle.is_linear()) {
    fixed_pi_star = oracle.optimal_policy();
    fixed_means = oracle.means();
  }

  long matched = 0;
  for (std::size_t cursor = 0; cursor < log.events.size() && matched < spec.horizon; ++cursor) {
    const ReplayEvent& ev = log.events[cursor];
    const std::optional<Eigen::MatrixXd>& contexts = ev.contexts;
    const Policy pi = algo.select(contexts, matched + 1, rng);
    const ReplayStepResult step = replay_step(log, cursor, pi, rng);
    if (!step.matched) continue;
    ++matched;
    if (contexts && oracle.is_linear()) {
      rec.observe(pi, oracle.optimal_policy(*contexts), oracle.means(*contexts),
                  step.sampled_arm);
    } else {
      rec.observe(pi, *fixed_pi_star, fixed_means, step.sampled_arm);
    }
    algo.update(step.sampled_arm, step.reward,
                contexts ? std::optional<Eigen::VectorXd>(contexts->row(step.sampled_arm))
                         : std::nullopt);
  }
  RunResult out = rec.finish();
  out.truncated = matched < spec.horizon;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Aggregate aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) throw std::invalid_argument("aggregate: no results");
  const auto& rounds = results.front().checkpoint_rounds;
  for (const auto& r : results)
    if (r.checkpoint_rounds != rounds)
      throw std::invalid_argument("aggregate: misaligned checkpoints");

  const auto n = static_cast<double>(results.size());
  auto mean_std = [&](auto&& get) {
    std::pair<double, double> ms{0.0, 0.0};
    for (const auto& r : results) ms.first += get(r);
    ms.first /= n;
    if (results.size() > 1) {
      double ss = 0.0;
      for (const auto& r : results) {
        const double d = get(r) - ms.first;
        ss += d * d;
      }
      ms.second = std::sqrt(ss / (n - 1.0));
    }
    return ms;
  };

  Aggregate agg;
  agg.checkpoint_rounds = rounds;
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    auto [fm, fs] = mean_std([&](const RunResult& r) { return r.fr_at[i]; });
    auto [rm, rs] = mean_std([&](const RunResult& r) { return r.rr_at[i]; });
    agg.fr_mean.push_back(fm);
    agg.fr_std.push_back(fs);
    agg.rr_mean.push_back(rm);
    agg.rr_std.push_back(rs);
  }
  std::tie(agg.final_fr_mean, agg.final_fr_std) =
      mean_std([](const RunResult& r) { return r.final_fr; });
  std::tie(agg.final_rr_mean, agg.final_rr_std) =
      mean_std([](const RunResult& r) { return r.final_rr; });
  return agg;
}

// ---------------------------------------------------------------------------
// context construction
// ---------------------------------------------------------------------------

namespace {

std::vector<int> split_indices(int n, double validation_frac, std::uint64_t master_seed,
                               SplitTag tag) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = derive_rng({master_seed, kSplitStream});
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  const int n_val = static_cast<int>(std::lround(validation_frac * n));
  std::vector<int> rows;
  if (tag == SplitTag::Validation)
    rows.assign(perm.begin(), perm.begin() + n_val);
  else
    rows.assign(perm.begin() + n_val, perm.end());
  if (rows.empty()) throw std::runtime_error("split produced an empty row set");
  std::sort(rows.begin(), rows.end());
  return rows;
}

Interval merit_domain_for(const EnvSpec& env) {
  // MAB: rewards live in [-1,1]; linear: |theta . x| <= ||theta|| ||x|| <= 1.
  (void)env;
  return {-1.0, 1.0};
}

Eigen::VectorXd make_theta_star(const EnvSpec& env) {
  if (!env.theta_star.empty())
    return Eigen::Map<const Eigen::VectorXd>(env.theta_star.data(),
                                             static_cast<long>(env.theta_star.size()));
  if (env.dim < 1) throw std::runtime_error("linear_synthetic: dim must be >= 1");
  Rng rng = derive_rng({env.theta_seed, kThetaStream});
  Eigen::VectorXd theta(env.dim);
  for (int i = 0; i < env.dim; ++i) theta(i) = draw_normal(rng);
  const double norm = theta.norm();
  if (norm > 0.0) theta *= std::min(env.theta_norm, 1.0) / norm;
  return theta;
}

RewardNoise make_noise(const NoiseSpec& n) {
  if (n.kind == "bernoulli") return RewardNoise::bernoulli();
  if (n.kind == "gaussian") return RewardNoise::gaussian(n.sigma);
  if (n.kind == "uniform") return RewardNoise::bounded_uniform(n.halfwidth);
  throw std::runtime_error("env.noise.kind must be bernoulli|gaussian|uniform");
}

std::vector<double> label_means_for_rows(const MultilabelDataset& data,
                                         const std::vector<int>& rows) {
  std::vector<double> means(data.num_arms(), 0.0);
  for (int r : rows)
    for (int a = 0; a < data.num_arms(); ++a) means[a] += data.labels(r, a);
  for (double& m : means) m /= static_cast<double>(rows.size());
  return means;
}

void require_oracle(const std::string& requested, std::initializer_list<std::string> allowed,
                    const std::string& env_type) {
  for (const auto& a : allowed)
    if (requested == a || requested == "auto") return;
  throw std::runtime_error("oracle mode '" + requested + "' unsupported for env " + env_type);
}

// identity merit only makes sense when every reference mean is positive
void check_identity_means(const MeritFunction& merit, const FairOracle& oracle) {
  if (merit.kind() != MeritKind::Identity || oracle.is_linear()) return;
  for (double m : oracle.fitted_params())
    if (!(m > 0.0))
      throw std::runtime_error(
          "identity merit requires an environment with strictly positive means");
}

void check_declared_arms(const EnvSpec& env, int actual_arms) {
  if (env.num_arms > 0 && env.num_arms != actual_arms)
    throw std::runtime_error("env.num_arms=" + std::to_string(env.num_arms) +
                             " disagrees with the data's " + std::to_string(actual_arms) +
                             " label columns");
}

}  // namespace

ExperimentContext build_context(const ExperimentConfig& cfg, SplitTag tag) {
  cfg.validate();
  ExperimentContext ctx;
  ctx.cfg = cfg;
  ctx.tag = tag;
  const Interval domain = merit_domain_for(cfg.env);
  const MeritFunction merit = cfg.merit.make(domain);
  ctx.merit = merit;

  const EnvSpec& env = cfg.env;
  if (env.type == "mab_means") {
    require_oracle(cfg.oracle, {"known"}, env.type);
    if (env.means.empty()) throw std::runtime_error("mab_means: means required");
    MabInstance inst(env.means, make_noise(env.noise));
    ctx.shape = {inst.num_arms(), 0};
    ctx.env_proto = std::make_unique<MabEnv>(inst);
    ctx.oracle = FairOracle::known_params(merit, env.means, /*linear=*/false);
  } else if (env.type == "mab_dataset") {
    require_oracle(cfg.oracle, {"empirical"}, env.type);
    auto data = std::make_shared<const MultilabelDataset>(MultilabelDataset::load(env.dataset));
    ctx.split_rows =
        split_indices(data->num_rows(), cfg.split.validation, cfg.master_seed, tag);
    ctx.dataset = data;
    ctx.shape = {data->num_arms(), 0};
    ctx.env_proto = std::make_unique<DatasetMabEnv>(data, ctx.split_rows);
    ctx.oracle = FairOracle::empirical_means(merit, label_means_for_rows(*data, ctx.split_rows));
  } else if (env.type == "linear_synthetic") {
    require_oracle(cfg.oracle, {"known"}, env.type);
    const Eigen::VectorXd theta = make_theta_star(env);
    if (env.num_arms < 1) throw std::runtime_error("linear_synthetic: num_arms required");
    ctx.shape = {env.num_arms, static_cast<int>(theta.size())};
    ctx.env_proto = std::make_unique<SyntheticLinearEnv>(theta, env.num_arms, env.noise_sigma);
    ctx.oracle = FairOracle::known_params(
        merit, std::vector<double>(theta.data(), theta.data() + theta.size()),
        /*linear=*/true);
  } else if (env.type == "linear_dataset" || env.type == "linear_dataset_wellspec") {
    auto data = std::make_shared<const MultilabelDataset>(MultilabelDataset::load(env.dataset));
    ctx.dataset = data;
    ctx.split_rows =
        split_indices(data->num_rows(), cfg.split.validation, cfg.master_seed, tag);
    Rng rff_rng = derive_rng({cfg.master_seed, kRffStream});
    auto model = std::make_shared<const RffContextModel>(data, env.rff_dim, env.rff_sigma,
                                                         rff_rng);
    ctx.rff = model;
    ctx.shape = {data->num_arms(), env.rff_dim};
    if (env.type == "linear_dataset") {
      require_oracle(cfg.oracle, {"least_squares"}, env.type);
      ctx.env_proto = std::make_unique<DatasetLinearEnv>(
          model, ctx.split_rows, DatasetLinearEnv::RewardModel::LabelBits, env.noise_sigma);
      const Eigen::VectorXd fit = model->least_squares_fit(ctx.split_rows);
      ctx.oracle = FairOracle::least_squares_fitted(
          merit, std::vector<double>(fit.data(), fit.data() + fit.size()));
    } else {
      require_oracle(cfg.oracle, {"known"}, env.type);
      // rewards come from the full-information least-squares solution, which
      // also is the exact reference parameter
      auto e = std::make_unique<DatasetLinearEnv>(
          model, ctx.split_rows, DatasetLinearEnv::RewardModel::WellSpecified, env.noise_sigma);
      const Eigen::VectorXd& theta = e->wellspec_theta();
      ctx.oracle = FairOracle::known_params(
          merit, std::vector<double>(theta.data(), theta.data() + theta.size()),
          /*linear=*/true);
      ctx.env_proto = std::move(e);
    }
  } else if (env.type == "replay") {
    if (env.log.empty()) throw std::runtime_error("replay: log path required");
    std::shared_ptr<const ReplayLog> log;
    if (!env.validation_log.empty()) {
      log = std::make_shared<const ReplayLog>(
          ReplayLog::load(tag == SplitTag::Validation ? env.validation_log : env.log));
    } else {
      auto full = ReplayLog::load(env.log);
      const auto n_val =
          static_cast<std::size_t>(std::lround(cfg.split.validation * full.events.size()));
      ReplayLog part;
      part.num_arms = full.num_arms;
      part.dim = full.dim;
      part.uniform_logging = full.uniform_logging;
      if (tag == SplitTag::Validation)
        part.events.assign(full.events.begin(), full.events.begin() + n_val);
      else
        part.events.assign(full.events.begin() + n_val, full.events.end());
      log = std::make_shared<const ReplayLog>(std::move(part));
    }
    if (!log->uniform_logging)
      throw std::runtime_error("replay: log not flagged as uniformly logged");
    if (log->events.empty()) throw std::runtime_error("replay: split holds no events");
    ctx.shape = {log->num_arms, log->dim};
    if (log->dim == 0) {
      require_oracle(cfg.oracle, {"empirical"}, env.type);
      ctx.oracle = FairOracle::empirical_means(merit, *log);
    } else {
      require_oracle(cfg.oracle, {"least_squares", "empirical"}, env.type);
      if (cfg.oracle == "empirical")
        ctx.oracle = FairOracle::empirical_means(merit, *log);
      else
        ctx.oracle = FairOracle::least_squares(merit, *log);
    }
    ctx.replay = log;
  } else {
    throw std::runtime_error("unknown env type: " + env.type);
  }
  if (ctx.dataset) check_declared_arms(env, ctx.dataset->num_arms());
  check_identity_means(*ctx.merit, *ctx.oracle);
  return ctx;
}

// ---------------------------------------------------------------------------
// experiment driver
// ---------------------------------------------------------------------------

AlgoFactory default_algo_factory() {
  return [](const AlgoSpec& algo, const std::map<std::string, double>& params,
            const AlgoShape& shape, const std::optional<MeritFunction>& merit,
            const PgdConfig& pgd) {
    return make_algorithm(algo.name, params, shape, merit, pgd, algo.beta_schedule);
  };
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  pool.reserve(k);
  for (std::size_t i = 0; i < k; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

RunSpec spec_from_config(const ExperimentConfig& cfg) {
  RunSpec spec;
  spec.horizon = cfg.horizon;
  spec.checkpoints = cfg.checkpoint_rounds.empty()
                         ? default_checkpoints(cfg.horizon, cfg.num_checkpoints)
                         : cfg.checkpoint_rounds;
  std::sort(spec.checkpoints.begin(), spec.checkpoints.end());
  spec.checkpoints.erase(std::unique(spec.checkpoints.begin(), spec.checkpoints.end()),
                         spec.checkpoints.end());
  spec.exposure_by_pulls = cfg.exposure_basis == "pulls";
  return spec;
}

// One seeded run with a fresh algorithm and environment; the rng stream is a
// pure function of (master seed, split, grid point, seed index), so the
// parallel schedule cannot influence any result.
RunResult execute_run(const ExperimentContext& ctx, const RunSpec& spec,
                      const std::map<std::string, double>& params, const AlgoFactory& factory,
                      std::uint64_t grid_index, std::size_t seed_index) {
  const ExperimentConfig& cfg = ctx.cfg;
  const std::uint64_t tag_id = ctx.tag == SplitTag::Validation ? 1 : 2;
  Rng rng = derive_rng(
      {cfg.master_seed, kRunStream, tag_id, grid_index, static_cast<std::uint64_t>(seed_index)});
  auto algo = factory(cfg.algo, params, ctx.shape, ctx.merit, cfg.pgd);
  RunResult res;
  if (ctx.is_replay()) {
    res = run_once_replay(spec, *algo, *ctx.replay, *ctx.oracle, rng);
  } else {
    auto env = ctx.env_proto->clone();
    res = run_once(spec, *algo, *env, *ctx.oracle, rng);
  }
  res.seed_index = static_cast<int>(seed_index);
  return res;
}

}  // namespace

namespace {

// Truncated replay runs can end at different checkpoints; aggregate over the
// common prefix so the truncation stays visible instead of crashing or being
// padded away.
Aggregate aggregate_runs(const std::vector<RunResult>& runs) {
  bool truncated = false;
  std::size_t common = runs.front().checkpoint_rounds.size();
  for (const auto& r : runs) {
    truncated = truncated || r.truncated;
    common = std::min(common, r.checkpoint_rounds.size());
  }
  if (!truncated) return aggregate(runs);
  std::vector<RunResult> trimmed = runs;
  for (auto& r : trimmed) {
    r.checkpoint_rounds.resize(common);
    r.fr_at.resize(common);
    r.rr_at.resize(common);
    if (common > 0) {
      r.final_fr = r.fr_at.back();
      r.final_rr = r.rr_at.back();
    }
  }
  return aggregate(trimmed);
}

}  // namespace

ExperimentOutputs run_experiment(const ExperimentContext& ctx,
                                 const std::map<std::string, double>& params, int threads,
                                 const AlgoFactory& factory, std::uint64_t grid_index) {
  const ExperimentConfig& cfg = ctx.cfg;
  const RunSpec spec = spec_from_config(cfg);
  std::map<std::string, double> merged = cfg.algo.params;
  for (const auto& [k, v] : params) merged[k] = v;

  ExperimentOutputs out;
  out.runs.resize(cfg.num_seeds);
  parallel_for(static_cast<std::size_t>(cfg.num_seeds), threads, [&](std::size_t i) {
    out.runs[i] = execute_run(ctx, spec, merged, factory, grid_index, i);
  });
  out.agg = aggregate_runs(out.runs);
  return out;
}

// ---------------------------------------------------------------------------
// grid search
// ---------------------------------------------------------------------------

namespace {

std::vector<std::map<std::string, double>> enumerate_grid(
    const std::map<std::string, std::vector<double>>& grid) {
  std::vector<std::map<std::string, double>> points{{}};
  // std::map iterates keys in sorted order, values in listed order; the
  // resulting enumeration is the tie-break order
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw std::invalid_argument("grid: empty value list for " + key);
    std::vector<std::map<std::string, double>> next;
    next.reserve(points.size() * values.size());
    for (const auto& p : points)
      for (double v : values) {
        auto q = p;
        q[key] = v;
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

}  // namespace

GridSearchResult grid_search(const ExperimentConfig& cfg, int threads,
                             const AlgoFactory& factory) {
  if (cfg.algo.grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  const ExperimentContext ctx = build_context(cfg, SplitTag::Validation);
  const auto points = enumerate_grid(cfg.algo.grid);
  const RunSpec spec = spec_from_config(cfg);
  const std::size_t seeds = static_cast<std::size_t>(cfg.num_seeds);

  std::vector<std::map<std::string, double>> merged(points.size());
  for (std::size_t gi = 0; gi < points.size(); ++gi) {
    merged[gi] = cfg.algo.params;
    for (const auto& [k, v] : points[gi]) merged[gi][k] = v;
  }

  // parallel over every (grid point x seed) pair
  std::vector<std::vector<RunResult>> runs(points.size(), std::vector<RunResult>(seeds));
  parallel_for(points.size() * seeds, threads, [&](std::size_t job) {
    const std::size_t gi = job / seeds;
    const std::size_t si = job % seeds;
    runs[gi][si] = execute_run(ctx, spec, merged[gi], factory, gi + 1, si);
  });

  GridSearchResult res;
  std::size_t best_idx = 0;
  for (std::size_t gi = 0; gi < points.size(); ++gi) {
    const Aggregate agg = aggregate_runs(runs[gi]);
    res.table.push_back({points[gi], agg.final_fr_mean, agg.final_rr_mean});
    const GridRow& cur = res.table.back();
    const GridRow& best = res.table[best_idx];
    if (cur.fr_mean < best.fr_mean ||
        (cur.fr_mean == best.fr_mean && cur.rr_mean < best.rr_mean))
      best_idx = gi;
  }
  res.best = res.table[best_idx].params;
  return res;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_traces_csv(std::ostream& out, const std::vector<RunResult>& runs,
                      const CsvMeta& meta) {
  out << "round,fr_cum,rr_cum,seed,algo,env,merit_c\n";
  for (const auto& run : runs)
    for (std::size_t i = 0; i < run.checkpoint_rounds.size(); ++i)
      out << run.checkpoint_rounds[i] << "," << fmt(run.fr_at[i]) << "," << fmt(run.rr_at[i])
          << "," << run.seed_index << "," << meta.algo << "," << meta.env << ","
          << fmt(meta.merit_tag) << "\n";
}

void write_exposure_csv(std::ostream& out, const std::vector<RunResult>& runs,
                        const CsvMeta& meta) {
  out << "arm,avg_exposure,optimal_exposure,algo,seed\n";
  for (const auto& run : runs) {
    if (run.rounds_completed == 0) continue;
    for (std::size_t a = 0; a < run.avg_exposure.size(); ++a)
      out << a << "," << fmt(run.avg_exposure[a]) << "," << fmt(run.avg_optimal_exposure[a])
          << "," << meta.algo << "," << run.seed_index << "\n";
  }
}

void write_summary_csv(std::ostream& out, const Aggregate& agg, const CsvMeta& meta) {
  out << "algo,merit_c,T,fr_mean,fr_std,rr_mean,rr_std\n";
  out << meta.algo << "," << fmt(meta.merit_tag) << "," << meta.horizon << ","
      << fmt(agg.final_fr_mean) << "," << fmt(agg.final_fr_std) << "," << fmt(agg.final_rr_mean)
      << "," << fmt(agg.final_rr_std) << "\n";
}

void write_grid_csv(std::ostream& out, const GridSearchResult& grid) {
  out << "params,fr_mean,rr_mean,selected\n";
  for (const auto& row : grid.table) {
    std::ostringstream ps;
    bool first = true;
    for (const auto& [k, v] : row.params) {
      if (!first) ps << ";";
      ps << k << "=" << fmt(v);
      first = false;
    }
    out << ps.str() << "," << fmt(row.fr_mean) << "," << fmt(row.rr_mean) << ","
        << (row.params == grid.best ? 1 : 0) << "\n";
  }
}

void write_experiment_outputs(const std::string& dir, const ExperimentConfig& cfg,
                              const ExperimentOutputs& outputs) {
  std::filesystem::create_directories(dir);
  const CsvMeta meta{cfg.algo.name, cfg.name, cfg.merit.tag(), cfg.horizon};
  {
    std::ofstream f(dir + "/traces.csv");
    if (!f) throw std::runtime_error("cannot write " + dir + "/traces.csv");
    write_traces_csv(f, outputs.runs, meta);
  }
  {
    std::ofstream f(dir + "/exposure.csv");
    if (!f) throw std::runtime_error("cannot write " + dir + "/exposure.csv");
    write_exposure_csv(f, outputs.runs, meta);
  }
  {
    std::ofstream f(dir + "/summary.csv");
    if (!f) throw std::runtime_error("cannot write " + dir + "/summary.csv");
    write_summary_csv(f, outputs.agg, meta);
  }
}

}  // namespace fairx
