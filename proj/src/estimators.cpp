#include "fairx/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace fairx {

ArmStats::ArmStats(int num_arms) : counts_(num_arms, 0), sums_(num_arms, 0.0) {
  if (num_arms < 1) throw std::invalid_argument("ArmStats: need at least one arm");
}

void ArmStats::update(int arm, double reward) {
  if (arm < 0 || arm >= num_arms()) throw std::out_of_range("ArmStats: arm out of range");
  ++counts_[arm];
  sums_[arm] += reward;
  ++total_;
}

double ArmStats::mean(int arm) const {
  if (counts_.at(arm) == 0) throw std::logic_error("ArmStats: mean of an unpulled arm");
  return sums_[arm] / static_cast<double>(counts_[arm]);
}

int ArmStats::first_unpulled() const {
  for (int a = 0; a < num_arms(); ++a)
    if (counts_[a] == 0) return a;
  return -1;
}

RidgeState::RidgeState(int dim, double lambda) : lambda_(lambda) {
  if (dim < 1) throw std::invalid_argument("RidgeState: dim must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("RidgeState: lambda must be positive");
  V_ = lambda * Eigen::MatrixXd::Identity(dim, dim);
  B_ = Eigen::VectorXd::Zero(dim);
}

void RidgeState::update(const Eigen::VectorXd& x, double r) {
  if (x.size() != B_.size()) throw std::invalid_argument("RidgeState: dimension mismatch");
  V_.noalias() += x * x.transpose();
  // keep V exactly symmetric; rank-one drift accumulates over long runs
  V_ = ((V_ + V_.transpose()) * 0.5).eval();
  B_.noalias() += x * r;
  ++updates_;
}

Eigen::VectorXd RidgeState::solve() const {
  Eigen::LLT<Eigen::MatrixXd> llt(V_);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("RidgeState: V is not positive definite");
  return llt.solve(B_);
}

PerArmPosterior::PerArmPosterior(int num_arms, double prior_mean, double prior_var)
    : means_(num_arms, prior_mean), vars_(num_arms, prior_var) {
  if (num_arms < 1) throw std::invalid_argument("PerArmPosterior: need at least one arm");
  if (!(prior_var > 0.0)) throw std::invalid_argument("PerArmPosterior: prior_var must be > 0");
}

PerArmPosterior::PerArmPosterior(std::vector<double> means, std::vector<double> vars)
    : means_(std::move(means)), vars_(std::move(vars)) {
  if (means_.empty() || means_.size() != vars_.size())
    throw std::invalid_argument("PerArmPosterior: bad parameter vectors");
  for (double v : vars_)
    if (!(v > 0.0)) throw std::invalid_argument("PerArmPosterior: variances must be > 0");
}

void PerArmPosterior::update(int arm, double reward, double reward_var) {
  if (arm < 0 || arm >= num_arms()) throw std::out_of_range("PerArmPosterior: arm out of range");
  if (!(reward_var > 0.0)) throw std::invalid_argument("PerArmPosterior: reward_var must be > 0");
  const double prec = 1.0 / vars_[arm] + 1.0 / reward_var;
  means_[arm] = (means_[arm] / vars_[arm] + reward / reward_var) / prec;
  vars_[arm] = 1.0 / prec;
}

std::vector<double> PerArmPosterior::sample(Rng& rng) const {
  std::vector<double> out(means_.size());
  for (std::size_t a = 0; a < means_.size(); ++a)
    out[a] = means_[a] + std::sqrt(vars_[a]) * draw_normal(rng);
  return out;
}

MultivariatePosterior::MultivariatePosterior(int dim, double prior_var, double noise_var)
    : noise_var_(noise_var) {
  if (dim < 1) throw std::invalid_argument("MultivariatePosterior: dim must be positive");
  if (!(prior_var > 0.0) || !(noise_var > 0.0))
    throw std::invalid_argument("MultivariatePosterior: variances must be > 0");
  precision_ = (1.0 / prior_var) * Eigen::MatrixXd::Identity(dim, dim);
  shift_ = Eigen::VectorXd::Zero(dim);
}

void MultivariatePosterior::update(const Eigen::VectorXd& x, double r) {
  if (x.size() != shift_.size())
    throw std::invalid_argument("MultivariatePosterior: dimension mismatch");
  precision_.noalias() += (x * x.transpose()) / noise_var_;
  precision_ = ((precision_ + precision_.transpose()) * 0.5).eval();
  shift_.noalias() += x * (r / noise_var_);
}

Eigen::VectorXd MultivariatePosterior::mean() const {
  Eigen::LLT<Eigen::MatrixXd> llt(precision_);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("MultivariatePosterior: precision is not positive definite");
  return llt.solve(shift_);
}

Eigen::VectorXd MultivariatePosterior::sample(Rng& rng) const {
  Eigen::LLT<Eigen::MatrixXd> llt(precision_);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("MultivariatePosterior: precision is not positive definite");
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) z(i) = draw_normal(rng);
  // cov = precision^{-1} = L^{-T} L^{-1}, so mean + L^{-T} z has the posterior law
  Eigen::VectorXd u = llt.matrixU().solve(z);
  return llt.solve(shift_) + u;
}

}  // namespace fairx
