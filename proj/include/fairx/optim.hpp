#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "fairx/merit.hpp"

namespace fairx {

/// Parameter confidence set: an axis-aligned box (MAB widths alpha/sqrt(N))
/// or the ellipsoid {theta : ||theta - center||_V <= sqrt(beta)}.
class ConfidenceRegion {
 public:
  static ConfidenceRegion box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static ConfidenceRegion ellipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape,
                                    double radius_sq);

  bool is_box() const { return is_box_; }
  int dim() const { return static_cast<int>(center_.size()); }
  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::VectorXd& lo() const;
  const Eigen::VectorXd& hi() const;
  const Eigen::MatrixXd& shape() const;
  double radius_sq() const;

  bool contains(const Eigen::VectorXd& theta, double tol = 1e-9) const;

  // Euclidean projection. Boxes clamp componentwise; ellipsoids use the
  // one-dimensional dual root-find on the eigendecomposition of V.
  Eigen::VectorXd project(const Eigen::VectorXd& theta) const;

  // Box regions only: componentwise intersection with [domain.lo, domain.hi].
  // An empty intersection collapses to the clamped coordinate.
  ConfidenceRegion intersect(const Interval& domain) const;

 private:
  ConfidenceRegion() = default;

  bool is_box_ = true;
  Eigen::VectorXd center_;
  Eigen::VectorXd lo_, hi_;         // box
  Eigen::MatrixXd shape_;           // ellipsoid V
  double radius_sq_ = 0.0;          // ellipsoid beta
  // eigendecomposition of V, computed on first projection and reused
  struct EllipsoidCache;
  mutable std::shared_ptr<EllipsoidCache> cache_;
};

/// Projected-gradient settings; defaults follow the experimental protocol.
struct PgdConfig {
  double step_size = 0.01;
  int num_steps = 10;
};

// Merit-weighted expected reward sum_a pi_theta(a) * value_a, where value_a
// is theta_a (MAB) or theta.x_a (linear, contexts as K x d rows). Values are
// clamped into the merit eval_domain before merit evaluation.
double optimistic_objective(const MeritFunction& merit, const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd* contexts = nullptr);

// Closed-form gradient of the objective above.
Eigen::VectorXd optimistic_gradient(const MeritFunction& merit, const Eigen::VectorXd& theta,
                                    const Eigen::MatrixXd* contexts = nullptr);

// Projected gradient ascent from init; returns the best iterate visited
// (including init), so the result never scores below the starting point.
Eigen::VectorXd pgd_maximize(const MeritFunction& merit, const ConfidenceRegion& region,
                             const Eigen::VectorXd& init, const PgdConfig& cfg,
                             const Eigen::MatrixXd* contexts = nullptr);

// Ellipsoid radius schedule (W + sqrt(d ln(1+t/d) + 2 ln(pi^2 t^2/(3 delta))))^2
// for ||theta*||_2 <= W.
double beta_schedule(long t, int dim, double W, double delta);

}  // namespace fairx
