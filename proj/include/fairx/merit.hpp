#pragma once

#include <string>
#include <utility>

namespace fairx {

// Closed interval; merit regularity constants are guaranteed on it.
struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  double width() const { return hi - lo; }
};

enum class MeritKind { Exponential, Identity, PiecewiseLinear };

/// Positive nondecreasing map from an arm's mean reward to its merit.
///
/// Three families: exp(c*theta), theta itself (positive domain only), and
/// the piecewise-linear ramp {1 for theta<=0, L*theta+1 above}. The declared
/// minimum-merit and Lipschitz constants hold on eval_domain; evaluation
/// itself is defined for any finite argument except Identity at theta<=0.
class MeritFunction {
 public:
  static MeritFunction exponential(double c, Interval domain = {-1.0, 1.0});
  static MeritFunction identity(Interval domain = {1e-9, 1.0});
  static MeritFunction piecewise_linear(double slope, Interval domain = {-1.0, 1.0});

  double eval(double theta) const;
  double operator()(double theta) const { return eval(theta); }

  // log f(theta); computed without exponentiating for the exponential family
  // so policy weights with large c*theta stay finite.
  double log_eval(double theta) const;

  // Right derivative of f; feeds the analytic policy-objective gradient.
  double slope(double theta) const;

  // Exact (min merit, Lipschitz constant) on [lo, hi] within eval_domain.
  std::pair<double, double> constants_on_interval(double lo, double hi) const;

  MeritKind kind() const { return kind_; }
  // c for Exponential, L for PiecewiseLinear, 1 for Identity.
  double param() const { return param_; }
  double min_merit() const { return min_merit_; }
  double lipschitz() const { return lipschitz_; }
  const Interval& eval_domain() const { return domain_; }
  std::string describe() const;

 private:
  MeritFunction(MeritKind kind, double param, Interval domain);

  MeritKind kind_;
  double param_;
  Interval domain_;
  double min_merit_;
  double lipschitz_;
};

}  // namespace fairx
