#include "fairx/optim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fairx/policy.hpp"

namespace fairx {

struct ConfidenceRegion::EllipsoidCache {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

ConfidenceRegion ConfidenceRegion::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw std::invalid_argument("box: bad bounds");
  if (((hi - lo).array() < 0.0).any())
    throw std::invalid_argument("box: lo must be <= hi componentwise");
  ConfidenceRegion r;
  r.is_box_ = true;
  r.center_ = 0.5 * (lo + hi);
  r.lo_ = std::move(lo);
  r.hi_ = std::move(hi);
  return r;
}

ConfidenceRegion ConfidenceRegion::ellipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape,
                                             double radius_sq) {
  if (center.size() == 0 || shape.rows() != center.size() || shape.cols() != center.size())
    throw std::invalid_argument("ellipsoid: bad dimensions");
  if (!(radius_sq >= 0.0)) throw std::invalid_argument("ellipsoid: beta must be >= 0");
  ConfidenceRegion r;
  r.is_box_ = false;
  r.center_ = std::move(center);
  r.shape_ = std::move(shape);
  r.radius_sq_ = radius_sq;
  return r;
}

const Eigen::VectorXd& ConfidenceRegion::lo() const {
  if (!is_box_) throw std::logic_error("lo(): not a box region");
  return lo_;
}

const Eigen::VectorXd& ConfidenceRegion::hi() const {
  if (!is_box_) throw std::logic_error("hi(): not a box region");
  return hi_;
}

const Eigen::MatrixXd& ConfidenceRegion::shape() const {
  if (is_box_) throw std::logic_error("shape(): not an ellipsoid region");
  return shape_;
}

double ConfidenceRegion::radius_sq() const {
  if (is_box_) throw std::logic_error("radius_sq(): not an ellipsoid region");
  return radius_sq_;
}

bool ConfidenceRegion::contains(const Eigen::VectorXd& theta, double tol) const {
  if (theta.size() != center_.size()) throw std::invalid_argument("contains: dim mismatch");
  if (is_box_)
    return (theta.array() >= lo_.array() - tol).all() &&
           (theta.array() <= hi_.array() + tol).all();
  const Eigen::VectorXd diff = theta - center_;
  const double q = diff.dot(shape_ * diff);
  const double rad = std::sqrt(std::max(radius_sq_, 0.0));
  return std::sqrt(std::max(q, 0.0)) <= rad + tol;
}

Eigen::VectorXd ConfidenceRegion::project(const Eigen::VectorXd& theta) const {
  if (theta.size() != center_.size()) throw std::invalid_argument("project: dim mismatch");
  if (is_box_) return theta.cwiseMax(lo_).cwiseMin(hi_);

  const Eigen::VectorXd diff = theta - center_;
  const double q = diff.dot(shape_ * diff);
  if (q <= radius_sq_) return theta;  // interior points are fixed points
  if (radius_sq_ == 0.0) return center_;

  if (!cache_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape_);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("project: eigendecomposition failed");
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::runtime_error("project: ellipsoid shape matrix is not positive definite");
    cache_ = std::make_shared<EllipsoidCache>(EllipsoidCache{es.eigenvalues(), es.eigenvectors()});
  }
  const Eigen::VectorXd& lam = cache_->eigenvalues;
  const Eigen::MatrixXd& Q = cache_->eigenvectors;

  // In the eigenbasis: minimize ||u - z||^2 subject to sum_i lam_i u_i^2 <= beta.
  // KKT gives u_i = z_i / (1 + nu lam_i) with nu > 0 the root of g below,
  // which is strictly decreasing in nu.
  const Eigen::VectorXd z = Q.transpose() * diff;
  const double beta = radius_sq_;
  auto g = [&](double nu) {
    double s = 0.0;
    for (int i = 0; i < z.size(); ++i) {
      const double scaled = z(i) / (1.0 + nu * lam(i));
      s += lam(i) * scaled * scaled;
    }
    return s - beta;
  };

  double lo_nu = 0.0;
  double hi_nu = (std::sqrt(lam.dot(z.cwiseProduct(z)) / beta) - 1.0) / lam.minCoeff();
  hi_nu = std::max(hi_nu, 1e-16);
  while (g(hi_nu) > 0.0) hi_nu *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo_nu + hi_nu);
    const double val = g(mid);
    if (std::abs(val) <= 1e-10 * std::max(1.0, beta)) {
      lo_nu = hi_nu = mid;
      break;
    }
    (val > 0.0 ? lo_nu : hi_nu) = mid;
    if (hi_nu - lo_nu <= 1e-15 * std::max(1.0, hi_nu)) break;
  }
  const double nu = 0.5 * (lo_nu + hi_nu);
  Eigen::VectorXd u(z.size());
  for (int i = 0; i < z.size(); ++i) u(i) = z(i) / (1.0 + nu * lam(i));
  return center_ + Q * u;
}

ConfidenceRegion ConfidenceRegion::intersect(const Interval& domain) const {
  if (!is_box_) throw std::logic_error("intersect: only box regions support intersection");
  Eigen::VectorXd lo = lo_.cwiseMax(domain.lo).cwiseMin(domain.hi);
  Eigen::VectorXd hi = hi_.cwiseMax(domain.lo).cwiseMin(domain.hi);
  for (int i = 0; i < lo.size(); ++i) {
    if (lo(i) > hi(i)) {  // empty slice; collapse to the nearest domain point
      const double c = domain.clamp(center_(i));
      lo(i) = hi(i) = c;
    }
  }
  return box(std::move(lo), std::move(hi));
}

namespace {

// Per-arm values entering the objective: theta itself or contexts * theta.
Eigen::VectorXd arm_values(const Eigen::VectorXd& theta, const Eigen::MatrixXd* contexts) {
  if (contexts == nullptr) return theta;
  if (contexts->cols() != theta.size())
    throw std::invalid_argument("optimistic objective: context dimension mismatch");
  return *contexts * theta;
}

struct ObjectiveEval {
  double value;
  Policy policy;
  Eigen::VectorXd values;          // raw per-arm values
  Eigen::VectorXd clamped_values;  // values pushed into the merit domain
};

ObjectiveEval evaluate(const MeritFunction& merit, const Eigen::VectorXd& theta,
                       const Eigen::MatrixXd* contexts) {
  ObjectiveEval ev;
  ev.values = arm_values(theta, contexts);
  const Interval& dom = merit.eval_domain();
  ev.clamped_values = ev.values.cwiseMax(dom.lo).cwiseMin(dom.hi);
  const int k = static_cast<int>(ev.values.size());
  std::vector<double> u(ev.clamped_values.data(), ev.clamped_values.data() + k);
  ev.policy = fair_policy(merit, u);
  ev.value = 0.0;
  for (int a = 0; a < k; ++a) ev.value += ev.policy.probs[a] * ev.values(a);
  return ev;
}

}  // namespace

double optimistic_objective(const MeritFunction& merit, const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd* contexts) {
  return evaluate(merit, theta, contexts).value;
}

Eigen::VectorXd optimistic_gradient(const MeritFunction& merit, const Eigen::VectorXd& theta,
                                    const Eigen::MatrixXd* contexts) {
  const ObjectiveEval ev = evaluate(merit, theta, contexts);
  const int k = static_cast<int>(ev.values.size());
  const Interval& dom = merit.eval_domain();

  // d/du_b [sum_a p_a u_a] = p_b + (f'(u_b)/S) (u_b - J); the merit factor
  // vanishes where the clamp is active. For the exponential family
  // f'(u)/S = c * p_b, which avoids forming the (possibly huge) sum S.
  Eigen::VectorXd dJ_du(k);
  double inv_s = 0.0;
  if (merit.kind() != MeritKind::Exponential) {
    double s = 0.0;
    for (int a = 0; a < k; ++a) s += merit.eval(ev.clamped_values(a));
    inv_s = 1.0 / s;
  }
  for (int b = 0; b < k; ++b) {
    const bool interior = ev.values(b) > dom.lo && ev.values(b) < dom.hi;
    double ratio = 0.0;  // f'(u_b)/S
    if (interior) {
      if (merit.kind() == MeritKind::Exponential)
        ratio = merit.param() * ev.policy.probs[b];
      else
        ratio = merit.slope(ev.clamped_values(b)) * inv_s;
    }
    dJ_du(b) = ev.policy.probs[b] + ratio * (ev.values(b) - ev.value);
    if (!std::isfinite(dJ_du(b)))
      throw std::runtime_error("optimistic_gradient: non-finite gradient");
  }
  if (contexts == nullptr) return dJ_du;
  return contexts->transpose() * dJ_du;
}

Eigen::VectorXd pgd_maximize(const MeritFunction& merit, const ConfidenceRegion& region,
                             const Eigen::VectorXd& init, const PgdConfig& cfg,
                             const Eigen::MatrixXd* contexts) {
  if (!(cfg.step_size > 0.0) || cfg.num_steps < 1)
    throw std::invalid_argument("pgd_maximize: bad config");
  Eigen::VectorXd theta = region.project(init);
  Eigen::VectorXd best = theta;
  double best_value = optimistic_objective(merit, theta, contexts);
  for (int step = 0; step < cfg.num_steps; ++step) {
    const Eigen::VectorXd grad = optimistic_gradient(merit, theta, contexts);
    theta = region.project(theta + cfg.step_size * grad);
    const double value = optimistic_objective(merit, theta, contexts);
    if (value > best_value) {
      best_value = value;
      best = theta;
    }
  }
  return best;
}

double beta_schedule(long t, int dim, double W, double delta) {
  if (t < 1) throw std::invalid_argument("beta_schedule: t must be >= 1");
  if (dim < 1) throw std::invalid_argument("beta_schedule: dim must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("beta_schedule: delta in (0,1)");
  if (!(W >= 0.0)) throw std::invalid_argument("beta_schedule: W must be >= 0");
  const double td = static_cast<double>(t);
  const double dd = static_cast<double>(dim);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double inner = dd * std::log1p(td / dd) + 2.0 * std::log(pi2 * td * td / (3.0 * delta));
  const double root = W + std::sqrt(inner);
  return root * root;
}

}  // namespace fairx
