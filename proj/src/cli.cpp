#include "fairx/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairx/config.hpp"
#include "fairx/envs.hpp"
#include "fairx/harness.hpp"

namespace fairx {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  double pgd_lr = 0.0;
  int pgd_steps = 0;
  int checkpoints = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
  cmd->add_option("--config", o.config_path, "experiment config (JSON)")
      ->required(config_required);
  cmd->add_option("--out", o.out_dir, "output directory (overrides config)");
  cmd->add_option("--set", o.overrides, "config override key.path=value (repeatable)");
  cmd->add_option("--seed", o.seed, "master seed (overrides config)")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--threads", o.threads, "worker threads (default: FAIRX_THREADS or 1)");
  cmd->add_option("--pgd-lr", o.pgd_lr, "projected-gradient step size");
  cmd->add_option("--pgd-steps", o.pgd_steps, "projected-gradient step count");
  cmd->add_option("--checkpoints", o.checkpoints, "number of log-spaced trace checkpoints");
}

int resolve_threads(const CommonOpts& o) {
  if (o.threads > 0) return o.threads;
  if (const char* env = std::getenv("FAIRX_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

ExperimentConfig load_with_overrides(const CommonOpts& o) {
  std::ifstream in(o.config_path);
  if (!in) throw std::runtime_error("cannot open config: " + o.config_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  for (const auto& ov : o.overrides) text = apply_override(text, ov);
  ExperimentConfig cfg = parse_config(text, o.config_path);
  if (o.seed_set) cfg.master_seed = o.seed;
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  if (o.pgd_lr > 0.0) cfg.pgd.step_size = o.pgd_lr;
  if (o.pgd_steps > 0) cfg.pgd.num_steps = o.pgd_steps;
  if (o.checkpoints > 0) cfg.num_checkpoints = o.checkpoints;
  cfg.validate();
  return cfg;
}

int cmd_run(const CommonOpts& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const ExperimentContext ctx = build_context(cfg, SplitTag::Test);
  const ExperimentOutputs out = run_experiment(ctx, {}, resolve_threads(o));
  write_experiment_outputs(cfg.output_dir, cfg, out);
  std::cout << cfg.name << ": " << cfg.algo.name << " T=" << cfg.horizon
            << " seeds=" << cfg.num_seeds << " fr=" << fmt(out.agg.final_fr_mean) << "±"
            << fmt(out.agg.final_fr_std) << " rr=" << fmt(out.agg.final_rr_mean) << "±"
            << fmt(out.agg.final_rr_std) << "\n";
  for (const auto& run : out.runs)
    if (run.truncated)
      std::cout << "warning: seed " << run.seed_index << " truncated after "
                << run.rounds_completed << " matched rounds\n";
  std::cout << "wrote " << cfg.output_dir << "/{traces,exposure,summary}.csv\n";
  return 0;
}

int cmd_grid(const CommonOpts& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const int threads = resolve_threads(o);
  const GridSearchResult grid = grid_search(cfg, threads);
  std::filesystem::create_directories(cfg.output_dir);
  {
    std::ofstream f(cfg.output_dir + "/grid.csv");
    if (!f) throw std::runtime_error("cannot write " + cfg.output_dir + "/grid.csv");
    write_grid_csv(f, grid);
  }
  std::cout << "selected:";
  for (const auto& [k, v] : grid.best) std::cout << " " << k << "=" << fmt(v);
  std::cout << "\n";
  const ExperimentContext ctx = build_context(cfg, SplitTag::Test);
  const ExperimentOutputs out = run_experiment(ctx, grid.best, threads);
  write_experiment_outputs(cfg.output_dir, cfg, out);
  std::cout << "test split: fr=" << fmt(out.agg.final_fr_mean) << "±"
            << fmt(out.agg.final_fr_std) << " rr=" << fmt(out.agg.final_rr_mean) << "±"
            << fmt(out.agg.final_rr_std) << "\n";
  std::cout << "wrote " << cfg.output_dir << "/{grid,traces,exposure,summary}.csv\n";
  return 0;
}

int cmd_exposure(const CommonOpts& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const ExperimentContext ctx = build_context(cfg, SplitTag::Test);
  const ExperimentOutputs out = run_experiment(ctx, {}, resolve_threads(o));
  std::filesystem::create_directories(cfg.output_dir);
  const CsvMeta meta{cfg.algo.name, cfg.name, cfg.merit.tag(), cfg.horizon};
  std::ofstream f(cfg.output_dir + "/exposure.csv");
  if (!f) throw std::runtime_error("cannot write " + cfg.output_dir + "/exposure.csv");
  write_exposure_csv(f, out.runs, meta);
  std::cout << "wrote " << cfg.output_dir << "/exposure.csv\n";
  return 0;
}

int cmd_fixtures(long horizon, const std::string& out_path) {
  const auto fixtures = lowerbound_fixtures(horizon);
  std::ostringstream csv;
  csv << "fixture,arm,mean,merit,optimal_policy\n";
  for (const auto& fx : fixtures) {
    std::cout << fx.name << ": merit=" << fx.merit.describe() << " means=(";
    for (int a = 0; a < fx.instance.num_arms(); ++a)
      std::cout << (a ? ", " : "") << fmt(fx.instance.means()[a]);
    std::cout << ") pi*=(";
    for (int a = 0; a < fx.instance.num_arms(); ++a)
      std::cout << (a ? ", " : "") << fmt(fx.optimal_policy.probs[a]);
    std::cout << ")\n";
    for (int a = 0; a < fx.instance.num_arms(); ++a)
      csv << fx.name << "," << a << "," << fmt(fx.instance.means()[a]) << ","
          << fx.merit.describe() << "," << fmt(fx.optimal_policy.probs[a]) << "\n";
  }
  if (!out_path.empty()) {
    std::filesystem::create_directories(std::filesystem::path(out_path).parent_path().string().empty()
                                            ? "."
                                            : std::filesystem::path(out_path).parent_path().string());
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << csv.str();
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_validate_log(const std::string& path) {
  try {
    const ReplayLog log = ReplayLog::load(path);
    std::cout << path << ": ok, K=" << log.num_arms << " d=" << log.dim
              << " events=" << log.events.size()
              << " uniform=" << (log.uniform_logging ? "yes" : "no") << "\n";
    if (!log.uniform_logging) {
      std::cerr << "error: log is not flagged as uniformly logged; replay "
                   "evaluation would be biased\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"merit-proportional fairness-of-exposure bandits"};
  app.require_subcommand(1);

  CommonOpts run_opts, grid_opts, exposure_opts;
  auto* run = app.add_subcommand("run", "run one aggregated experiment");
  add_common(run, run_opts);
  auto* grid = app.add_subcommand("grid", "grid-search hyperparameters, then run the test split");
  add_common(grid, grid_opts);
  auto* exposure = app.add_subcommand("exposure", "emit the average-exposure CSV");
  add_common(exposure, exposure_opts);

  long fixtures_T = 10000;
  std::string fixtures_out;
  auto* fixtures = app.add_subcommand("fixtures", "print the lower-bound instances and their fair policies");
  fixtures->add_option("--horizon", fixtures_T, "horizon parameterizing the instances");
  fixtures->add_option("--out", fixtures_out, "also write a CSV here");

  std::string log_path;
  auto* vlog = app.add_subcommand("validate-log", "check a replay log's format");
  vlog->add_option("log", log_path, "replay log path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (grid->parsed()) return cmd_grid(grid_opts);
    if (exposure->parsed()) return cmd_exposure(exposure_opts);
    if (fixtures->parsed()) return cmd_fixtures(fixtures_T, fixtures_out);
    if (vlog->parsed()) return cmd_validate_log(log_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace fairx
