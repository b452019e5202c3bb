#include "fairx/oracle.hpp"

#include <stdexcept>

namespace fairx {

FairOracle::FairOracle(OracleMode mode, MeritFunction merit, std::vector<double> params,
                       bool linear)
    : mode_(mode), merit_(std::move(merit)), params_(std::move(params)), linear_(linear) {
  if (params_.empty()) throw std::invalid_argument("FairOracle: empty parameters");
}

FairOracle FairOracle::known_params(MeritFunction merit, std::vector<double> params,
                                    bool linear) {
  return FairOracle(OracleMode::KnownParams, std::move(merit), std::move(params), linear);
}

FairOracle FairOracle::empirical_means(MeritFunction merit, const MultilabelDataset& data) {
  if (data.num_rows() == 0) throw std::invalid_argument("FairOracle: empty dataset");
  return FairOracle(OracleMode::EmpiricalMeans, std::move(merit), data.label_means(), false);
}

FairOracle FairOracle::empirical_means(MeritFunction merit, const ReplayLog& log) {
  if (log.events.empty()) throw std::invalid_argument("FairOracle: empty replay log");
  std::vector<double> sums(log.num_arms, 0.0);
  std::vector<long> counts(log.num_arms, 0);
  for (const auto& ev : log.events) {
    sums[ev.logged_arm] += ev.reward;
    ++counts[ev.logged_arm];
  }
  std::vector<double> means(log.num_arms, 0.0);
  for (int a = 0; a < log.num_arms; ++a)
    means[a] = counts[a] > 0 ? sums[a] / static_cast<double>(counts[a]) : 0.0;
  return FairOracle(OracleMode::EmpiricalMeans, std::move(merit), std::move(means), false);
}

FairOracle FairOracle::empirical_means(MeritFunction merit, std::vector<double> means) {
  return FairOracle(OracleMode::EmpiricalMeans, std::move(merit), std::move(means), false);
}

FairOracle FairOracle::least_squares_fitted(MeritFunction merit, std::vector<double> params) {
  return FairOracle(OracleMode::LeastSquares, std::move(merit), std::move(params), true);
}

FairOracle FairOracle::least_squares(MeritFunction merit, const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& response, double ridge) {
  if (design.rows() == 0 || design.rows() != response.size())
    throw std::invalid_argument("FairOracle: bad least-squares data");
  const int d = static_cast<int>(design.cols());
  Eigen::MatrixXd gram = ridge * Eigen::MatrixXd::Identity(d, d);
  gram.noalias() += design.transpose() * design;
  Eigen::VectorXd rhs = design.transpose() * response;
  Eigen::VectorXd theta = gram.ldlt().solve(rhs);
  return FairOracle(OracleMode::LeastSquares, std::move(merit),
                    std::vector<double>(theta.data(), theta.data() + d), true);
}

FairOracle FairOracle::least_squares(MeritFunction merit, const ReplayLog& log) {
  if (log.dim <= 0) throw std::invalid_argument("FairOracle: replay log has no contexts");
  const long n = static_cast<long>(log.events.size());
  Eigen::MatrixXd design(n, log.dim);
  Eigen::VectorXd response(n);
  for (long i = 0; i < n; ++i) {
    const auto& ev = log.events[static_cast<std::size_t>(i)];
    if (!ev.contexts) throw std::invalid_argument("FairOracle: event without contexts");
    design.row(i) = ev.contexts->row(ev.logged_arm);
    response(i) = ev.reward;
  }
  return least_squares(std::move(merit), design, response);
}

Policy FairOracle::optimal_policy() const {
  if (linear_) throw std::logic_error("FairOracle: linear oracle needs contexts");
  return fair_policy(merit_, params_);
}

Policy FairOracle::optimal_policy(const Eigen::MatrixXd& contexts) const {
  if (!linear_) return optimal_policy();
  return fair_policy(merit_, means(contexts));
}

std::vector<double> FairOracle::means() const {
  if (linear_) throw std::logic_error("FairOracle: linear oracle needs contexts");
  return params_;
}

std::vector<double> FairOracle::means(const Eigen::MatrixXd& contexts) const {
  if (!linear_) return params_;
  if (contexts.cols() != static_cast<long>(params_.size()))
    throw std::invalid_argument("FairOracle: context dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> theta(params_.data(), params_.size());
  Eigen::VectorXd dots = contexts * theta;
  return std::vector<double>(dots.data(), dots.data() + dots.size());
}

}  // namespace fairx
