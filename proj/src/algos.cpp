#include "fairx/algos.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace fairx {

double ucb_width(double alpha, long count) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("ucb_width: alpha must be >= 0");
  if (count < 1) throw std::logic_error("ucb_width: count is zero (initialization phase)");
  return alpha / std::sqrt(static_cast<double>(count));
}

void BanditAlgorithm::note_selected(const Policy& pi) {
  last_policy_ = pi;
  has_selected_ = true;
}

void BanditAlgorithm::check_update(int arm) const {
  if (!has_selected_) throw std::logic_error("update before any select");
  if (arm < 0 || arm >= last_policy_.num_arms())
    throw std::out_of_range("update: arm out of range");
  if (!(last_policy_.probs[arm] > 0.0))
    throw std::logic_error("update: arm was not drawable under the last policy");
}

namespace {

void expect_no_contexts(const std::optional<Eigen::MatrixXd>& contexts,
                        const std::string& who) {
  if (contexts.has_value())
    throw std::invalid_argument(who + ": MAB policy must not receive contexts");
}

const Eigen::MatrixXd& expect_contexts(const std::optional<Eigen::MatrixXd>& contexts,
                                       int num_arms, int dim, const std::string& who) {
  if (!contexts.has_value()) throw std::invalid_argument(who + ": contexts required");
  if (contexts->rows() != num_arms || contexts->cols() != dim)
    throw std::invalid_argument(who + ": context dimension mismatch");
  return *contexts;
}

std::vector<double> clamp_into(const MeritFunction& merit, const Eigen::VectorXd& values) {
  const Interval& dom = merit.eval_domain();
  std::vector<double> out(static_cast<std::size_t>(values.size()));
  for (int i = 0; i < values.size(); ++i) out[static_cast<std::size_t>(i)] = dom.clamp(values(i));
  return out;
}

Policy fair_policy_clamped(const MeritFunction& merit, const Eigen::VectorXd& values) {
  return fair_policy(merit, clamp_into(merit, values));
}

Policy mix_with_uniform(Policy base, double epsilon) {
  const int k = base.num_arms();
  for (double& p : base.probs) p = (1.0 - epsilon) * p + epsilon / k;
  return base;
}

int argmax_index(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

double require(const std::map<std::string, double>& params, const std::string& key,
               double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// FairXUcb
// ---------------------------------------------------------------------------

FairXUcb::FairXUcb(int num_arms, MeritFunction merit, double alpha, PgdConfig pgd)
    : stats_(num_arms), merit_(std::move(merit)), alpha_(alpha), pgd_(pgd) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("FairXUcb: alpha must be >= 0");
}

ConfidenceRegion FairXUcb::current_region() const {
  const int k = stats_.num_arms();
  Eigen::VectorXd lo(k), hi(k);
  for (int a = 0; a < k; ++a) {
    const double w = ucb_width(alpha_, stats_.count(a));
    lo(a) = stats_.mean(a) - w;
    hi(a) = stats_.mean(a) + w;
  }
  return ConfidenceRegion::box(std::move(lo), std::move(hi));
}

Policy FairXUcb::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng&) {
  expect_no_contexts(contexts, "FairXUcb");
  const int unpulled = stats_.first_unpulled();
  if (unpulled >= 0) {
    Policy pi = Policy::point_mass(num_arms(), unpulled);
    note_selected(pi);
    return pi;
  }
  const ConfidenceRegion region = current_region().intersect(merit_.eval_domain());
  Eigen::VectorXd center(num_arms());
  for (int a = 0; a < num_arms(); ++a) center(a) = stats_.mean(a);
  const Eigen::VectorXd theta = pgd_maximize(merit_, region, region.project(center), pgd_);
  Policy pi = fair_policy_clamped(merit_, theta);
  note_selected(pi);
  return pi;
}

void FairXUcb::update(int arm, double reward, const std::optional<Eigen::VectorXd>&) {
  check_update(arm);
  stats_.update(arm, reward);
}

// ---------------------------------------------------------------------------
// FairXTs
// ---------------------------------------------------------------------------

FairXTs::FairXTs(int num_arms, MeritFunction merit, double prior_mean, double prior_std,
                 double reward_std)
    : merit_(std::move(merit)),
      posterior_(num_arms, prior_mean, prior_std * prior_std),
      reward_var_(reward_std * reward_std) {
  if (!(reward_std > 0.0)) throw std::invalid_argument("FairXTs: reward_std must be > 0");
}

FairXTs::FairXTs(MeritFunction merit, PerArmPosterior posterior, double reward_std)
    : merit_(std::move(merit)),
      posterior_(std::move(posterior)),
      reward_var_(reward_std * reward_std) {
  if (!(reward_std > 0.0)) throw std::invalid_argument("FairXTs: reward_std must be > 0");
}

Policy FairXTs::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng& rng) {
  expect_no_contexts(contexts, "FairXTs");
  const std::vector<double> theta = posterior_.sample(rng);
  std::vector<double> clamped(theta.size());
  for (std::size_t a = 0; a < theta.size(); ++a)
    clamped[a] = merit_.eval_domain().clamp(theta[a]);
  Policy pi = fair_policy(merit_, clamped);
  note_selected(pi);
  return pi;
}

void FairXTs::update(int arm, double reward, const std::optional<Eigen::VectorXd>&) {
  check_update(arm);
  posterior_.update(arm, reward, reward_var_);
}

// ---------------------------------------------------------------------------
// FairXEg
// ---------------------------------------------------------------------------

FairXEg::FairXEg(int num_arms, MeritFunction merit, double epsilon)
    : stats_(num_arms), merit_(std::move(merit)), epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("FairXEg: epsilon must be in [0,1]");
}

Policy FairXEg::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng&) {
  expect_no_contexts(contexts, "FairXEg");
  const int unpulled = stats_.first_unpulled();
  Policy greedy = Policy::uniform(num_arms());
  if (unpulled >= 0) {
    greedy = Policy::point_mass(num_arms(), unpulled);
  } else {
    Eigen::VectorXd means(num_arms());
    for (int a = 0; a < num_arms(); ++a) means(a) = stats_.mean(a);
    greedy = fair_policy_clamped(merit_, means);
  }
  // the mixture is the deployed policy; sampling it realizes the
  // epsilon-branch between exploration and the merit-proportional policy
  Policy pi = mix_with_uniform(std::move(greedy), epsilon_);
  note_selected(pi);
  return pi;
}

void FairXEg::update(int arm, double reward, const std::optional<Eigen::VectorXd>&) {
  check_update(arm);
  stats_.update(arm, reward);
}

// ---------------------------------------------------------------------------
// UcbBaseline
// ---------------------------------------------------------------------------

UcbBaseline::UcbBaseline(int num_arms, double alpha) : stats_(num_arms), alpha_(alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("UcbBaseline: alpha must be >= 0");
}

Policy UcbBaseline::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng&) {
  expect_no_contexts(contexts, "UcbBaseline");
  const int unpulled = stats_.first_unpulled();
  int arm;
  if (unpulled >= 0) {
    arm = unpulled;
  } else {
    Eigen::VectorXd ucb(num_arms());
    for (int a = 0; a < num_arms(); ++a)
      ucb(a) = stats_.mean(a) + ucb_width(alpha_, stats_.count(a));
    arm = argmax_index(ucb);
  }
  Policy pi = Policy::point_mass(num_arms(), arm);
  note_selected(pi);
  return pi;
}

void UcbBaseline::update(int arm, double reward, const std::optional<Eigen::VectorXd>&) {
  check_update(arm);
  stats_.update(arm, reward);
}

// ---------------------------------------------------------------------------
// TsBaseline
// ---------------------------------------------------------------------------

TsBaseline::TsBaseline(int num_arms, double prior_mean, double prior_std, double reward_std)
    : posterior_(num_arms, prior_mean, prior_std * prior_std),
      reward_var_(reward_std * reward_std) {
  if (!(reward_std > 0.0)) throw std::invalid_argument("TsBaseline: reward_std must be > 0");
}

Policy TsBaseline::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng& rng) {
  expect_no_contexts(contexts, "TsBaseline");
  const std::vector<double> theta = posterior_.sample(rng);
  const Eigen::Map<const Eigen::VectorXd> v(theta.data(), static_cast<long>(theta.size()));
  Policy pi = Policy::point_mass(num_arms(), argmax_index(v));
  note_selected(pi);
  return pi;
}

void TsBaseline::update(int arm, double reward, const std::optional<Eigen::VectorXd>&) {
  check_update(arm);
  posterior_.update(arm, reward, reward_var_);
}

// ---------------------------------------------------------------------------
// FairXLinUcb
// ---------------------------------------------------------------------------

FairXLinUcb::FairXLinUcb(int dim, int num_arms, MeritFunction merit, double lambda, double beta,
                         PgdConfig pgd)
    : ridge_(dim, lambda), num_arms_(num_arms), merit_(std::move(merit)), fixed_beta_(beta),
      pgd_(pgd) {
  if (num_arms < 1) throw std::invalid_argument("FairXLinUcb: need at least one arm");
  if (!(beta >= 0.0)) throw std::invalid_argument("FairXLinUcb: beta must be >= 0");
}

FairXLinUcb::FairXLinUcb(int dim, int num_arms, MeritFunction merit, double lambda,
                         BetaSchedule schedule, PgdConfig pgd)
    : ridge_(dim, lambda), num_arms_(num_arms), merit_(std::move(merit)), fixed_beta_(0.0),
      schedule_(schedule), pgd_(pgd) {
  if (num_arms < 1) throw std::invalid_argument("FairXLinUcb: need at least one arm");
}

double FairXLinUcb::beta_at(long t) const {
  if (schedule_) return beta_schedule(t, ridge_.dim(), schedule_->W, schedule_->delta);
  return fixed_beta_;
}

Policy FairXLinUcb::select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng&) {
  const Eigen::MatrixXd& x = expect_contexts(contexts, num_arms_, ridge_.dim(), "FairXLinUcb");
  const Eigen::VectorXd theta_hat = ridge_.solve();
  const ConfidenceRegion region =
      ConfidenceRegion::ellipsoid(theta_hat, ridge_.V(), beta_at(std::max<long>(t, 1)));
  const Eigen::VectorXd theta = pgd_maximize(merit_, region, theta_hat, pgd_, &x);
  Policy pi = fair_policy_clamped(merit_, x * theta);
  note_selected(pi);
  return pi;
}

void FairXLinUcb::update(int arm, double reward,
                         const std::optional<Eigen::VectorXd>& context) {
  check_update(arm);
  if (!context) throw std::invalid_argument("FairXLinUcb: update requires the chosen context");
  ridge_.update(*context, reward);
}

// ---------------------------------------------------------------------------
// FairXLinTs
// ---------------------------------------------------------------------------

FairXLinTs::FairXLinTs(int dim, int num_arms, MeritFunction merit, double prior_std,
                       double reward_std)
    : posterior_(dim, prior_std * prior_std, reward_std * reward_std),
      num_arms_(num_arms),
      merit_(std::move(merit)) {
  if (num_arms < 1) throw std::invalid_argument("FairXLinTs: need at least one arm");
}

Policy FairXLinTs::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng& rng) {
  const Eigen::MatrixXd& x = expect_contexts(contexts, num_arms_, posterior_.dim(), "FairXLinTs");
  const Eigen::VectorXd theta = posterior_.sample(rng);
  Policy pi = fair_policy_clamped(merit_, x * theta);
  note_selected(pi);
  return pi;
}

void FairXLinTs::update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) {
  check_update(arm);
  if (!context) throw std::invalid_argument("FairXLinTs: update requires the chosen context");
  posterior_.update(*context, reward);
}

// ---------------------------------------------------------------------------
// FairXLinEg
// ---------------------------------------------------------------------------

FairXLinEg::FairXLinEg(int dim, int num_arms, MeritFunction merit, double epsilon, double lambda)
    : ridge_(dim, lambda), num_arms_(num_arms), merit_(std::move(merit)), epsilon_(epsilon) {
  if (num_arms < 1) throw std::invalid_argument("FairXLinEg: need at least one arm");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("FairXLinEg: epsilon must be in [0,1]");
}

Policy FairXLinEg::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng&) {
  const Eigen::MatrixXd& x = expect_contexts(contexts, num_arms_, ridge_.dim(), "FairXLinEg");
  Policy pi = mix_with_uniform(fair_policy_clamped(merit_, x * ridge_.solve()), epsilon_);
  note_selected(pi);
  return pi;
}

void FairXLinEg::update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) {
  check_update(arm);
  if (!context) throw std::invalid_argument("FairXLinEg: update requires the chosen context");
  ridge_.update(*context, reward);
}

// ---------------------------------------------------------------------------
// LinUcbBaseline
// ---------------------------------------------------------------------------

LinUcbBaseline::LinUcbBaseline(int dim, int num_arms, double lambda, double beta)
    : ridge_(dim, lambda), num_arms_(num_arms), beta_(beta) {
  if (num_arms < 1) throw std::invalid_argument("LinUcbBaseline: need at least one arm");
  if (!(beta >= 0.0)) throw std::invalid_argument("LinUcbBaseline: beta must be >= 0");
}

Policy LinUcbBaseline::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng&) {
  const Eigen::MatrixXd& x =
      expect_contexts(contexts, num_arms_, ridge_.dim(), "LinUcbBaseline");
  const Eigen::VectorXd theta_hat = ridge_.solve();
  const Eigen::LLT<Eigen::MatrixXd> llt(ridge_.V());
  Eigen::VectorXd ucb(num_arms_);
  const double rad = std::sqrt(beta_);
  for (int a = 0; a < num_arms_; ++a) {
    const Eigen::VectorXd xa = x.row(a).transpose();
    const double width = std::sqrt(xa.dot(llt.solve(xa)));
    ucb(a) = theta_hat.dot(xa) + rad * width;
  }
  Policy pi = Policy::point_mass(num_arms_, argmax_index(ucb));
  note_selected(pi);
  return pi;
}

void LinUcbBaseline::update(int arm, double reward,
                            const std::optional<Eigen::VectorXd>& context) {
  check_update(arm);
  if (!context) throw std::invalid_argument("LinUcbBaseline: update requires the chosen context");
  ridge_.update(*context, reward);
}

// ---------------------------------------------------------------------------
// LinTsBaseline
// ---------------------------------------------------------------------------

LinTsBaseline::LinTsBaseline(int dim, int num_arms, double prior_std, double reward_std)
    : posterior_(dim, prior_std * prior_std, reward_std * reward_std), num_arms_(num_arms) {
  if (num_arms < 1) throw std::invalid_argument("LinTsBaseline: need at least one arm");
}

Policy LinTsBaseline::select(const std::optional<Eigen::MatrixXd>& contexts, long, Rng& rng) {
  const Eigen::MatrixXd& x =
      expect_contexts(contexts, num_arms_, posterior_.dim(), "LinTsBaseline");
  const Eigen::VectorXd values = x * posterior_.sample(rng);
  Policy pi = Policy::point_mass(num_arms_, argmax_index(values));
  note_selected(pi);
  return pi;
}

void LinTsBaseline::update(int arm, double reward,
                           const std::optional<Eigen::VectorXd>& context) {
  check_update(arm);
  if (!context) throw std::invalid_argument("LinTsBaseline: update requires the chosen context");
  posterior_.update(*context, reward);
}

// ---------------------------------------------------------------------------
// FixedPolicyAlgorithm
// ---------------------------------------------------------------------------

FixedPolicyAlgorithm::FixedPolicyAlgorithm(Policy policy) : policy_(std::move(policy)) {
  policy_.validate();
}

Policy FixedPolicyAlgorithm::select(const std::optional<Eigen::MatrixXd>&, long, Rng&) {
  note_selected(policy_);
  return policy_;
}

void FixedPolicyAlgorithm::update(int arm, double, const std::optional<Eigen::VectorXd>&) {
  check_update(arm);
}

// ---------------------------------------------------------------------------
// factory
// ---------------------------------------------------------------------------

namespace {

void check_keys(const std::string& name, const std::map<std::string, double>& params,
                std::set<std::string> allowed) {
  for (const auto& [key, _] : params)
    if (!allowed.count(key))
      throw std::invalid_argument("algorithm '" + name + "': unknown parameter '" + key + "'");
}

const MeritFunction& need_merit(const std::optional<MeritFunction>& merit,
                                const std::string& name) {
  if (!merit) throw std::invalid_argument("algorithm '" + name + "' requires a merit function");
  return *merit;
}

}  // namespace

bool algorithm_is_linear(const std::string& name) {
  return name == "fairx_linucb" || name == "fairx_lints" || name == "fairx_lineg" ||
         name == "linucb" || name == "lints";
}

std::unique_ptr<BanditAlgorithm> make_algorithm(const std::string& name,
                                                const std::map<std::string, double>& params,
                                                const AlgoShape& shape,
                                                const std::optional<MeritFunction>& merit,
                                                const PgdConfig& pgd,
                                                bool beta_schedule_mode) {
  const int k = shape.num_arms;
  const int d = shape.dim;
  if (k < 1) throw std::invalid_argument("make_algorithm: bad arm count");
  if (algorithm_is_linear(name) && d < 1)
    throw std::invalid_argument("make_algorithm: '" + name + "' needs a context dimension");

  if (name == "fairx_ucb") {
    check_keys(name, params, {"alpha"});
    return std::make_unique<FairXUcb>(k, need_merit(merit, name), require(params, "alpha", 1.0),
                                      pgd);
  }
  if (name == "fairx_ts") {
    check_keys(name, params, {"prior_mean", "prior_std", "reward_std"});
    return std::make_unique<FairXTs>(k, need_merit(merit, name),
                                     require(params, "prior_mean", 0.0),
                                     require(params, "prior_std", 1.0),
                                     require(params, "reward_std", 1.0));
  }
  if (name == "fairx_eg") {
    check_keys(name, params, {"epsilon"});
    return std::make_unique<FairXEg>(k, need_merit(merit, name),
                                     require(params, "epsilon", 0.01));
  }
  if (name == "ucb") {
    check_keys(name, params, {"alpha"});
    return std::make_unique<UcbBaseline>(k, require(params, "alpha", 1.0));
  }
  if (name == "ts") {
    check_keys(name, params, {"prior_mean", "prior_std", "reward_std"});
    return std::make_unique<TsBaseline>(k, require(params, "prior_mean", 0.0),
                                        require(params, "prior_std", 1.0),
                                        require(params, "reward_std", 1.0));
  }
  if (name == "fairx_linucb") {
    if (beta_schedule_mode) {
      check_keys(name, params, {"lambda", "W", "delta"});
      return std::make_unique<FairXLinUcb>(
          d, k, need_merit(merit, name), require(params, "lambda", 1.0),
          BetaSchedule{require(params, "W", 1.0), require(params, "delta", 0.1)}, pgd);
    }
    check_keys(name, params, {"lambda", "beta"});
    return std::make_unique<FairXLinUcb>(d, k, need_merit(merit, name),
                                         require(params, "lambda", 1.0),
                                         require(params, "beta", 1.0), pgd);
  }
  if (name == "fairx_lints") {
    check_keys(name, params, {"prior_std", "reward_std"});
    return std::make_unique<FairXLinTs>(d, k, need_merit(merit, name),
                                        require(params, "prior_std", 1.0),
                                        require(params, "reward_std", 1.0));
  }
  if (name == "fairx_lineg") {
    check_keys(name, params, {"epsilon", "lambda"});
    return std::make_unique<FairXLinEg>(d, k, need_merit(merit, name),
                                        require(params, "epsilon", 0.01),
                                        require(params, "lambda", 1.0));
  }
  if (name == "linucb") {
    check_keys(name, params, {"lambda", "beta"});
    return std::make_unique<LinUcbBaseline>(d, k, require(params, "lambda", 1.0),
                                            require(params, "beta", 1.0));
  }
  if (name == "lints") {
    check_keys(name, params, {"prior_std", "reward_std"});
    return std::make_unique<LinTsBaseline>(d, k, require(params, "prior_std", 1.0),
                                           require(params, "reward_std", 1.0));
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

}  // namespace fairx
