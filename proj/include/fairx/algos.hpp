#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "fairx/estimators.hpp"
#include "fairx/merit.hpp"
#include "fairx/optim.hpp"
#include "fairx/policy.hpp"
#include "fairx/rng.hpp"

namespace fairx {

// w_{t,a} = alpha / sqrt(N_{t,a}); callers must be in the initialization
// phase while any count is zero.
double ucb_width(double alpha, long count);

/// Sequential decision interface shared by the ten policies. select returns
/// the deployed policy for round t; update consumes the chosen arm's reward
/// (bandit feedback only).
class BanditAlgorithm {
 public:
  virtual ~BanditAlgorithm() = default;

  virtual Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) = 0;
  virtual void update(int arm, double reward,
                      const std::optional<Eigen::VectorXd>& context) = 0;
  virtual int num_arms() const = 0;
  virtual bool needs_contexts() const = 0;
  virtual std::string name() const = 0;

 protected:
  // shared pre/post checks for select/update ordering and arm drawability
  void note_selected(const Policy& pi);
  void check_update(int arm) const;

 private:
  Policy last_policy_;
  bool has_selected_ = false;
};

// ---------------------------------------------------------------------------
// stochastic MAB policies
// ---------------------------------------------------------------------------

/// Optimism under a per-arm confidence box, policy merit-proportional in the
/// optimistic parameter. Rounds 1..K pull each arm once.
class FairXUcb final : public BanditAlgorithm {
 public:
  FairXUcb(int num_arms, MeritFunction merit, double alpha, PgdConfig pgd = {});

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return stats_.num_arms(); }
  bool needs_contexts() const override { return false; }
  std::string name() const override { return "fairx_ucb"; }

  // the round's confidence box (initialization phase must be over)
  ConfidenceRegion current_region() const;
  const ArmStats& stats() const { return stats_; }

 private:
  ArmStats stats_;
  MeritFunction merit_;
  double alpha_;
  PgdConfig pgd_;
};

/// Posterior sampling with a merit-proportional policy in the sampled
/// parameter.
class FairXTs final : public BanditAlgorithm {
 public:
  FairXTs(int num_arms, MeritFunction merit, double prior_mean, double prior_std,
          double reward_std);
  // collapsed/per-arm priors, used in tests and warm starts
  FairXTs(MeritFunction merit, PerArmPosterior posterior, double reward_std);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return posterior_.num_arms(); }
  bool needs_contexts() const override { return false; }
  std::string name() const override { return "fairx_ts"; }

  const PerArmPosterior& posterior() const { return posterior_; }

 private:
  MeritFunction merit_;
  PerArmPosterior posterior_;
  double reward_var_;
};

/// Epsilon-greedy with a merit-proportional greedy policy; the deployed
/// policy is the (1-eps) fair + eps uniform mixture.
class FairXEg final : public BanditAlgorithm {
 public:
  FairXEg(int num_arms, MeritFunction merit, double epsilon);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return stats_.num_arms(); }
  bool needs_contexts() const override { return false; }
  std::string name() const override { return "fairx_eg"; }

 private:
  ArmStats stats_;
  MeritFunction merit_;
  double epsilon_;
};

/// Conventional UCB: point mass on the largest upper confidence bound.
class UcbBaseline final : public BanditAlgorithm {
 public:
  UcbBaseline(int num_arms, double alpha);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return stats_.num_arms(); }
  bool needs_contexts() const override { return false; }
  std::string name() const override { return "ucb"; }

 private:
  ArmStats stats_;
  double alpha_;
};

/// Conventional Thompson sampling: point mass on the argmax of the sampled
/// parameter.
class TsBaseline final : public BanditAlgorithm {
 public:
  TsBaseline(int num_arms, double prior_mean, double prior_std, double reward_std);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return posterior_.num_arms(); }
  bool needs_contexts() const override { return false; }
  std::string name() const override { return "ts"; }

 private:
  PerArmPosterior posterior_;
  double reward_var_;
};

// ---------------------------------------------------------------------------
// stochastic linear bandit policies
// ---------------------------------------------------------------------------

struct BetaSchedule {
  double W = 1.0;
  double delta = 0.1;
};

/// Optimism over the ridge confidence ellipsoid; the radius is either a
/// fixed beta (experiment mode) or the theoretical schedule.
class FairXLinUcb final : public BanditAlgorithm {
 public:
  FairXLinUcb(int dim, int num_arms, MeritFunction merit, double lambda, double beta,
              PgdConfig pgd = {});
  FairXLinUcb(int dim, int num_arms, MeritFunction merit, double lambda, BetaSchedule schedule,
              PgdConfig pgd = {});

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return num_arms_; }
  bool needs_contexts() const override { return true; }
  std::string name() const override { return "fairx_linucb"; }

  const RidgeState& ridge() const { return ridge_; }
  double beta_at(long t) const;

 private:
  RidgeState ridge_;
  int num_arms_;
  MeritFunction merit_;
  double fixed_beta_;
  std::optional<BetaSchedule> schedule_;
  PgdConfig pgd_;
};

/// Gaussian posterior sampling for the linear model, merit-proportional
/// policy over the sampled parameter's predicted rewards.
class FairXLinTs final : public BanditAlgorithm {
 public:
  FairXLinTs(int dim, int num_arms, MeritFunction merit, double prior_std, double reward_std);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return num_arms_; }
  bool needs_contexts() const override { return true; }
  std::string name() const override { return "fairx_lints"; }

  const MultivariatePosterior& posterior() const { return posterior_; }

 private:
  MultivariatePosterior posterior_;
  int num_arms_;
  MeritFunction merit_;
};

/// Epsilon-greedy over the ridge estimate with a merit-proportional greedy
/// policy.
class FairXLinEg final : public BanditAlgorithm {
 public:
  FairXLinEg(int dim, int num_arms, MeritFunction merit, double epsilon, double lambda);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return num_arms_; }
  bool needs_contexts() const override { return true; }
  std::string name() const override { return "fairx_lineg"; }

 private:
  RidgeState ridge_;
  int num_arms_;
  MeritFunction merit_;
  double epsilon_;
};

/// Conventional LinUCB: point mass on argmax of theta_hat.x + sqrt(beta) ||x||_{V^-1}.
class LinUcbBaseline final : public BanditAlgorithm {
 public:
  LinUcbBaseline(int dim, int num_arms, double lambda, double beta);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return num_arms_; }
  bool needs_contexts() const override { return true; }
  std::string name() const override { return "linucb"; }

 private:
  RidgeState ridge_;
  int num_arms_;
  double beta_;
};

/// Conventional linear Thompson sampling: point mass on the argmax predicted
/// reward under the sampled parameter.
class LinTsBaseline final : public BanditAlgorithm {
 public:
  LinTsBaseline(int dim, int num_arms, double prior_std, double reward_std);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return num_arms_; }
  bool needs_contexts() const override { return true; }
  std::string name() const override { return "lints"; }

  const MultivariatePosterior& posterior() const { return posterior_; }

 private:
  MultivariatePosterior posterior_;
  int num_arms_;
};

/// Deploys one fixed policy every round; harness plumbing for smoke tests
/// and oracle-in-the-loop checks.
class FixedPolicyAlgorithm final : public BanditAlgorithm {
 public:
  explicit FixedPolicyAlgorithm(Policy policy);

  Policy select(const std::optional<Eigen::MatrixXd>& contexts, long t, Rng& rng) override;
  void update(int arm, double reward, const std::optional<Eigen::VectorXd>& context) override;
  int num_arms() const override { return policy_.num_arms(); }
  bool needs_contexts() const override { return false; }
  std::string name() const override { return "fixed"; }

 private:
  Policy policy_;
};

// ---------------------------------------------------------------------------
// construction by name
// ---------------------------------------------------------------------------

struct AlgoShape {
  int num_arms = 0;
  int dim = 0;  // 0 = MAB
};

// Names: fairx_ucb fairx_ts fairx_eg fairx_linucb fairx_lints fairx_lineg
//        ucb ts linucb lints
std::unique_ptr<BanditAlgorithm> make_algorithm(
    const std::string& name, const std::map<std::string, double>& params,
    const AlgoShape& shape, const std::optional<MeritFunction>& merit,
    const PgdConfig& pgd, bool beta_schedule_mode = false);

bool algorithm_is_linear(const std::string& name);

}  // namespace fairx
