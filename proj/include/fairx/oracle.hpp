#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fairx/envs.hpp"
#include "fairx/merit.hpp"
#include "fairx/policy.hpp"

namespace fairx {

enum class OracleMode { KnownParams, EmpiricalMeans, LeastSquares };

/// Reference model for regret accounting: holds the parameters defining the
/// optimal fair policy, fitted on full-information data (or known exactly),
/// never visible to the algorithms.
class FairOracle {
 public:
  // params are K arm means (MAB) or the d-dimensional reward parameter.
  static FairOracle known_params(MeritFunction merit, std::vector<double> params,
                                 bool linear);
  // per-arm full-information label means
  static FairOracle empirical_means(MeritFunction merit, const MultilabelDataset& data);
  // per-arm means of logged rewards under uniform logging
  static FairOracle empirical_means(MeritFunction merit, const ReplayLog& log);
  // precomputed per-arm means
  static FairOracle empirical_means(MeritFunction merit, std::vector<double> means);
  // precomputed least-squares parameter
  static FairOracle least_squares_fitted(MeritFunction merit, std::vector<double> params);
  // ordinary least squares from contexts to rewards, tiny ridge for conditioning
  static FairOracle least_squares(MeritFunction merit, const Eigen::MatrixXd& design,
                                  const Eigen::VectorXd& response, double ridge = 1e-8);
  static FairOracle least_squares(MeritFunction merit, const ReplayLog& log);

  OracleMode mode() const { return mode_; }
  bool is_linear() const { return linear_; }
  const std::vector<double>& fitted_params() const { return params_; }
  const MeritFunction& merit() const { return merit_; }

  // MAB reference policy (constant across rounds).
  Policy optimal_policy() const;
  // Linear reference policy for this round's contexts (time-dependent).
  Policy optimal_policy(const Eigen::MatrixXd& contexts) const;

  // Reference mean rewards feeding reward-regret accounting.
  std::vector<double> means() const;
  std::vector<double> means(const Eigen::MatrixXd& contexts) const;

 private:
  FairOracle(OracleMode mode, MeritFunction merit, std::vector<double> params, bool linear);

  OracleMode mode_;
  MeritFunction merit_;
  std::vector<double> params_;
  bool linear_;
};

}  // namespace fairx
