#include "fairx/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fairx {

void Policy::validate(double tol) const {
  if (probs.empty()) throw std::invalid_argument("policy: empty");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0 + tol)) throw std::invalid_argument("policy: entry outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("policy: does not sum to 1");
}

int Policy::sample(Rng& rng) const {
  double u = draw_uniform(rng);
  double acc = 0.0;
  for (int a = 0; a < num_arms(); ++a) {
    acc += probs[a];
    if (u < acc) return a;
  }
  return num_arms() - 1;  // guard against rounding in the tail
}

Policy Policy::point_mass(int num_arms, int arm) {
  if (arm < 0 || arm >= num_arms) throw std::out_of_range("point_mass: arm out of range");
  Policy p{std::vector<double>(num_arms, 0.0)};
  p.probs[arm] = 1.0;
  return p;
}

Policy Policy::uniform(int num_arms) {
  if (num_arms < 1) throw std::invalid_argument("uniform: need at least one arm");
  return Policy{std::vector<double>(num_arms, 1.0 / num_arms)};
}

Policy policy_from_merits(std::span<const double> merits) {
  if (merits.empty()) throw std::invalid_argument("policy_from_merits: empty");
  double sum = 0.0;
  for (double m : merits) {
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::domain_error("policy_from_merits: merits must be positive and finite");
    sum += m;
  }
  Policy p{std::vector<double>(merits.size())};
  for (std::size_t a = 0; a < merits.size(); ++a) p.probs[a] = merits[a] / sum;
  return p;
}

Policy policy_from_log_merits(std::span<const double> log_merits) {
  if (log_merits.empty()) throw std::invalid_argument("policy_from_log_merits: empty");
  double mx = -std::numeric_limits<double>::infinity();
  for (double lm : log_merits) {
    if (std::isnan(lm)) throw std::domain_error("policy_from_log_merits: nan");
    mx = std::max(mx, lm);
  }
  std::vector<double> w(log_merits.size());
  double sum = 0.0;
  for (std::size_t a = 0; a < log_merits.size(); ++a) {
    w[a] = std::exp(log_merits[a] - mx);
    sum += w[a];
  }
  Policy p{std::move(w)};
  for (double& v : p.probs) v /= sum;
  return p;
}

Policy fair_policy(const MeritFunction& merit, std::span<const double> theta) {
  if (theta.empty()) throw std::invalid_argument("fair_policy: empty parameter vector");
  if (merit.kind() == MeritKind::Exponential) {
    std::vector<double> lm(theta.size());
    for (std::size_t a = 0; a < theta.size(); ++a) lm[a] = merit.log_eval(theta[a]);
    return policy_from_log_merits(lm);
  }
  std::vector<double> m(theta.size());
  for (std::size_t a = 0; a < theta.size(); ++a) m[a] = merit.eval(theta[a]);
  return policy_from_merits(m);
}

double fairness_regret_step(const Policy& pi, const Policy& pi_star) {
  if (pi.num_arms() != pi_star.num_arms())
    throw std::invalid_argument("fairness_regret_step: dimension mismatch");
  double d = 0.0;
  for (int a = 0; a < pi.num_arms(); ++a) d += std::abs(pi_star.probs[a] - pi.probs[a]);
  return d;
}

double reward_regret_step(const Policy& pi, const Policy& pi_star,
                          std::span<const double> means) {
  if (pi.num_arms() != pi_star.num_arms() ||
      means.size() != static_cast<std::size_t>(pi.num_arms()))
    throw std::invalid_argument("reward_regret_step: dimension mismatch");
  double gap = 0.0;
  for (int a = 0; a < pi.num_arms(); ++a)
    gap += (pi_star.probs[a] - pi.probs[a]) * means[a];
  return gap;
}

void RegretTrace::observe(const Policy& pi, const Policy& pi_star,
                          std::span<const double> means, int chosen_arm) {
  if (exposure_counts.empty()) {
    exposure_counts.assign(pi.num_arms(), 0);
    cum_policy_mass.assign(pi.num_arms(), 0.0);
  }
  if (chosen_arm < 0 || chosen_arm >= pi.num_arms())
    throw std::out_of_range("RegretTrace::observe: arm out of range");
  ++round;
  cum_fairness_regret += fairness_regret_step(pi, pi_star);
  cum_reward_regret += reward_regret_step(pi, pi_star, means);
  ++exposure_counts[chosen_arm];
  for (int a = 0; a < pi.num_arms(); ++a) cum_policy_mass[a] += pi.probs[a];
}

Policy average_exposure(const RegretTrace& trace) {
  if (trace.round < 1) throw std::invalid_argument("average_exposure: no rounds recorded");
  Policy p{trace.cum_policy_mass};
  for (double& v : p.probs) v /= static_cast<double>(trace.round);
  return p;
}

Policy average_realized_exposure(const RegretTrace& trace) {
  if (trace.round < 1) throw std::invalid_argument("average_exposure: no rounds recorded");
  Policy p{std::vector<double>(trace.exposure_counts.size())};
  for (std::size_t a = 0; a < trace.exposure_counts.size(); ++a)
    p.probs[a] = static_cast<double>(trace.exposure_counts[a]) / static_cast<double>(trace.round);
  return p;
}

}  // namespace fairx
