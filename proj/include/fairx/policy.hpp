#pragma once

#include <span>
#include <vector>

#include "fairx/merit.hpp"
#include "fairx/rng.hpp"

namespace fairx {

/// Probability vector over K arms; the unit of fairness accounting.
struct Policy {
  std::vector<double> probs;

  int num_arms() const { return static_cast<int>(probs.size()); }
  // entries in [0,1] and summing to 1 within tol; throws otherwise.
  void validate(double tol = 1e-9) const;
  int sample(Rng& rng) const;

  static Policy point_mass(int num_arms, int arm);
  static Policy uniform(int num_arms);
};

// Normalize raw (positive) merit values into a policy.
Policy policy_from_merits(std::span<const double> merits);
// Same via log-merits with the usual max-subtraction; safe for steep merits.
Policy policy_from_log_merits(std::span<const double> log_merits);

// The unique merit-proportional policy for parameter vector theta.
Policy fair_policy(const MeritFunction& merit, std::span<const double> theta);

// l1 distance between the deployed policy and the fair reference; in [0,2].
double fairness_regret_step(const Policy& pi, const Policy& pi_star);

// Expected-reward gap of pi against pi_star under the given means; signed.
double reward_regret_step(const Policy& pi, const Policy& pi_star,
                          std::span<const double> means);

/// Per-round cumulative fairness/reward regret and exposure accounting.
/// Owned by the harness; algorithms never see the fair reference policy.
struct RegretTrace {
  long round = 0;
  double cum_fairness_regret = 0.0;
  double cum_reward_regret = 0.0;
  std::vector<long> exposure_counts;    // realized pulls, for diagnostics
  std::vector<double> cum_policy_mass;  // sum over rounds of pi_t(a)

  explicit RegretTrace(int num_arms = 0)
      : exposure_counts(num_arms, 0), cum_policy_mass(num_arms, 0.0) {}

  void observe(const Policy& pi, const Policy& pi_star,
               std::span<const double> means, int chosen_arm);
};

// Policy-mass exposure, cum_policy_mass / round.
Policy average_exposure(const RegretTrace& trace);
// Realized-pull exposure, exposure_counts / round.
Policy average_realized_exposure(const RegretTrace& trace);

}  // namespace fairx
