#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairx/merit.hpp"
#include "fairx/policy.hpp"
#include "fairx/rng.hpp"

namespace fairx {

// ---------------------------------------------------------------------------
// stochastic multi-armed bandits
// ---------------------------------------------------------------------------

struct RewardNoise {
  enum class Kind { Bernoulli, Gaussian, BoundedUniform };
  Kind kind = Kind::Bernoulli;
  double sigma = 1.0;      // Gaussian std deviation
  double halfwidth = 1.0;  // BoundedUniform support half-width

  static RewardNoise bernoulli() { return {Kind::Bernoulli, 0.0, 0.0}; }
  static RewardNoise gaussian(double sigma) { return {Kind::Gaussian, sigma, 0.0}; }
  static RewardNoise bounded_uniform(double halfwidth) {
    return {Kind::BoundedUniform, 0.0, halfwidth};
  }
};

/// A fixed collection of reward distributions, one per arm.
class MabInstance {
 public:
  MabInstance(std::vector<double> means, RewardNoise noise);

  double pull(int arm, Rng& rng) const;
  int num_arms() const { return static_cast<int>(means_.size()); }
  const std::vector<double>& means() const { return means_; }
  const RewardNoise& noise() const { return noise_; }
  Interval reward_range() const { return reward_range_; }

 private:
  std::vector<double> means_;
  RewardNoise noise_;
  Interval reward_range_;
};

// ---------------------------------------------------------------------------
// harness-facing environment interface
// ---------------------------------------------------------------------------

/// Sequential bandit environment. begin_round yields the round's contexts
/// (K x d rows) for linear environments and nullopt for MAB; pull draws the
/// chosen arm's reward for the current round.
class BanditEnv {
 public:
  virtual ~BanditEnv() = default;
  virtual int num_arms() const = 0;
  virtual int dim() const { return 0; }  // 0 = MAB
  bool is_linear() const { return dim() > 0; }
  virtual std::optional<Eigen::MatrixXd> begin_round(Rng& rng) = 0;
  virtual double pull(int arm, Rng& rng) = 0;
  virtual std::unique_ptr<BanditEnv> clone() const = 0;
};

class MabEnv final : public BanditEnv {
 public:
  explicit MabEnv(MabInstance instance) : instance_(std::move(instance)) {}
  int num_arms() const override { return instance_.num_arms(); }
  std::optional<Eigen::MatrixXd> begin_round(Rng&) override { return std::nullopt; }
  double pull(int arm, Rng& rng) override { return instance_.pull(arm, rng); }
  std::unique_ptr<BanditEnv> clone() const override { return std::make_unique<MabEnv>(*this); }
  const MabInstance& instance() const { return instance_; }

 private:
  MabInstance instance_;
};

// ---------------------------------------------------------------------------
// multi-label datasets
// ---------------------------------------------------------------------------

/// Rows of the sparse multi-label text format "l1,l2,... f:v f:v ...".
struct MultilabelDataset {
  Eigen::MatrixXd features;  // N x F
  Eigen::MatrixXd labels;    // N x K of {0,1}

  int num_rows() const { return static_cast<int>(features.rows()); }
  int num_features() const { return static_cast<int>(features.cols()); }
  int num_arms() const { return static_cast<int>(labels.cols()); }

  std::vector<double> label_means() const;
  MultilabelDataset subset(const std::vector<int>& rows) const;

  static MultilabelDataset load(const std::string& path);
  static MultilabelDataset parse(std::istream& in, const std::string& origin = "<stream>");
};

/// Bandit view of a multi-label dataset: each round samples a row uniformly
/// (from the given subset, or all rows), arms are classes, the pulled arm
/// reveals its label bit.
class DatasetMabEnv final : public BanditEnv {
 public:
  explicit DatasetMabEnv(std::shared_ptr<const MultilabelDataset> data,
                         std::vector<int> rows = {});
  int num_arms() const override { return data_->num_arms(); }
  std::optional<Eigen::MatrixXd> begin_round(Rng& rng) override;
  double pull(int arm, Rng& rng) override;
  std::unique_ptr<BanditEnv> clone() const override;

 private:
  std::shared_ptr<const MultilabelDataset> data_;
  std::vector<int> rows_;
  int current_row_ = -1;
};

// ---------------------------------------------------------------------------
// random Fourier features and dataset-derived linear bandits
// ---------------------------------------------------------------------------

/// Randomized cosine feature map z(v) = sqrt(2/D) cos(Omega v + b)
/// approximating the Gaussian kernel exp(-||v-v'||^2 / (2 sigma^2)).
struct RandomFourierFeatures {
  Eigen::MatrixXd omega;  // D x raw_dim, entries N(0, sigma^-2)
  Eigen::VectorXd phase;  // D, entries U[0, 2pi)
  double sigma = 1.0;

  static RandomFourierFeatures draw(int feature_dim, int raw_dim, double sigma, Rng& rng);
  Eigen::VectorXd transform(const Eigen::VectorXd& raw) const;
  int feature_dim() const { return static_cast<int>(phase.size()); }
};

// Median pairwise distance over a subset of raw (example x one-hot arm)
// vectors; the default kernel bandwidth when none is configured.
double median_raw_distance(const MultilabelDataset& data, int num_samples, Rng& rng);

/// Immutable RFF context model shared by all runs of one experiment:
/// the frozen feature map, the global norm scale, and (when it fits in
/// memory) the precomputed context of every (row, arm) pair.
class RffContextModel {
 public:
  RffContextModel(std::shared_ptr<const MultilabelDataset> data, int rff_dim,
                  double rff_sigma, Rng& rng);

  Eigen::MatrixXd contexts_for_row(int row) const;  // K x D, norm-scaled
  int dim() const { return rff_dim_; }
  int num_arms() const { return data_->num_arms(); }
  const MultilabelDataset& data() const { return *data_; }
  double norm_scale() const { return norm_scale_; }
  double sigma() const { return rff_.sigma; }

  // Least-squares fit from scaled contexts to label bits over the given
  // rows' (row, arm) pairs (all rows when empty); used by the well-specified
  // reward model and as the linear-oracle design data.
  Eigen::VectorXd least_squares_fit(const std::vector<int>& rows = {},
                                    double ridge = 1e-8) const;

 private:
  Eigen::MatrixXd raw_contexts_for_row(int row) const;

  std::shared_ptr<const MultilabelDataset> data_;
  RandomFourierFeatures rff_;
  int rff_dim_;
  double norm_scale_ = 1.0;
  std::vector<Eigen::MatrixXd> cache_;  // per-row K x D, empty when too large
};

/// Linear bandit over dataset rows: contexts from the RFF model, reward
/// either the chosen arm's label bit or, in the well-specified variant,
/// theta_ls . x plus Gaussian noise.
class DatasetLinearEnv final : public BanditEnv {
 public:
  enum class RewardModel { LabelBits, WellSpecified };

  DatasetLinearEnv(std::shared_ptr<const RffContextModel> model, std::vector<int> rows,
                   RewardModel reward_model, double wellspec_noise_sigma = 0.1);

  int num_arms() const override { return model_->num_arms(); }
  int dim() const override { return model_->dim(); }
  std::optional<Eigen::MatrixXd> begin_round(Rng& rng) override;
  double pull(int arm, Rng& rng) override;
  std::unique_ptr<BanditEnv> clone() const override;

  const Eigen::VectorXd& wellspec_theta() const { return theta_ls_; }
  RewardModel reward_model() const { return reward_model_; }

 private:
  std::shared_ptr<const RffContextModel> model_;
  std::vector<int> rows_;
  RewardModel reward_model_;
  double noise_sigma_;
  Eigen::VectorXd theta_ls_;  // only for WellSpecified
  int current_row_ = -1;
  Eigen::MatrixXd current_contexts_;
};

/// Synthetic linear bandit: fresh Gaussian contexts each round, rewards
/// theta* . x plus Gaussian noise. Contexts are scaled into the unit ball.
class SyntheticLinearEnv final : public BanditEnv {
 public:
  SyntheticLinearEnv(Eigen::VectorXd theta_star, int num_arms, double noise_sigma);

  int num_arms() const override { return num_arms_; }
  int dim() const override { return static_cast<int>(theta_star_.size()); }
  std::optional<Eigen::MatrixXd> begin_round(Rng& rng) override;
  double pull(int arm, Rng& rng) override;
  std::unique_ptr<BanditEnv> clone() const override;

  const Eigen::VectorXd& theta_star() const { return theta_star_; }
  double mean_reward(const Eigen::VectorXd& x) const { return theta_star_.dot(x); }

 private:
  Eigen::VectorXd theta_star_;
  int num_arms_;
  double noise_sigma_;
  Eigen::MatrixXd current_contexts_;
};

// ---------------------------------------------------------------------------
// logged-data replay
// ---------------------------------------------------------------------------

struct ReplayEvent {
  double timestamp = 0.0;
  int logged_arm = 0;
  double reward = 0.0;
  std::optional<Eigen::MatrixXd> contexts;  // K x d, absent when d == 0
};

/// Uniformly-logged interaction log. Text format: a header line "K d uniform"
/// followed by one event per line,
///   timestamp logged_arm reward k d ctx[0] ... ctx[k*d-1]
struct ReplayLog {
  int num_arms = 0;
  int dim = 0;  // 0 = no contexts
  bool uniform_logging = false;
  std::vector<ReplayEvent> events;

  static ReplayLog load(const std::string& path);
  static ReplayLog parse(std::istream& in, const std::string& origin = "<stream>");
  void save(const std::string& path) const;
};

struct ReplayStepResult {
  bool matched = false;
  int sampled_arm = -1;
  double reward = 0.0;
};

// Sample a ~ pi for the event at cursor; a match (sampled == logged arm)
// reveals the logged reward, otherwise the event is skipped.
ReplayStepResult replay_step(const ReplayLog& log, std::size_t cursor, const Policy& pi,
                             Rng& rng);

// ---------------------------------------------------------------------------
// closed-form lower-bound instances
// ---------------------------------------------------------------------------

/// Two-arm Gaussian pairs showing that dropping either merit regularity
/// condition forces linear fairness regret, with their exact fair policies.
struct LowerBoundFixture {
  std::string name;
  MabInstance instance;
  MeritFunction merit;
  Policy optimal_policy;
};

std::vector<LowerBoundFixture> lowerbound_fixtures(long horizon);

}  // namespace fairx
