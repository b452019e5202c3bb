#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fairx/rng.hpp"

namespace fairx {

/// Empirical means with per-arm pull counts.
class ArmStats {
 public:
  explicit ArmStats(int num_arms);

  void update(int arm, double reward);
  long count(int arm) const { return counts_.at(arm); }
  // mean is defined only where count > 0; throws otherwise.
  double mean(int arm) const;
  int num_arms() const { return static_cast<int>(counts_.size()); }
  long total_count() const { return total_; }
  // lowest-index arm with count 0, or -1 if all pulled.
  int first_unpulled() const;

 private:
  std::vector<long> counts_;
  std::vector<double> sums_;
  long total_ = 0;
};

/// Incremental ridge regression: V = lambda*I + sum x x^T, B = sum x r.
class RidgeState {
 public:
  RidgeState(int dim, double lambda);

  void update(const Eigen::VectorXd& x, double r);
  // theta_hat solving V theta = B through an SPD factorization.
  Eigen::VectorXd solve() const;

  const Eigen::MatrixXd& V() const { return V_; }
  const Eigen::VectorXd& B() const { return B_; }
  double lambda() const { return lambda_; }
  int dim() const { return static_cast<int>(B_.size()); }
  long num_updates() const { return updates_; }

 private:
  Eigen::MatrixXd V_;
  Eigen::VectorXd B_;
  double lambda_;
  long updates_ = 0;
};

/// Independent normal-normal conjugate posterior per arm.
class PerArmPosterior {
 public:
  PerArmPosterior(int num_arms, double prior_mean, double prior_var);
  PerArmPosterior(std::vector<double> means, std::vector<double> vars);

  void update(int arm, double reward, double reward_var);
  std::vector<double> sample(Rng& rng) const;

  double mean(int arm) const { return means_.at(arm); }
  double variance(int arm) const { return vars_.at(arm); }
  int num_arms() const { return static_cast<int>(means_.size()); }

 private:
  std::vector<double> means_;
  std::vector<double> vars_;
};

/// Multivariate Gaussian posterior for a linear reward model, kept in
/// natural parameters: precision Lambda and shift Lambda*mean. With prior
/// N(0, prior_var*I) and observation noise noise_var this is Bayesian
/// ridge regression.
class MultivariatePosterior {
 public:
  MultivariatePosterior(int dim, double prior_var, double noise_var);

  void update(const Eigen::VectorXd& x, double r);
  Eigen::VectorXd mean() const;
  const Eigen::MatrixXd& precision() const { return precision_; }
  Eigen::VectorXd sample(Rng& rng) const;
  int dim() const { return static_cast<int>(shift_.size()); }
  double noise_var() const { return noise_var_; }

 private:
  Eigen::MatrixXd precision_;
  Eigen::VectorXd shift_;
  double noise_var_;
};

}  // namespace fairx
