#include "fairx/merit.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fairx {

namespace {

void check_domain(const Interval& d) {
  if (!(d.lo <= d.hi)) throw std::invalid_argument("merit: eval_domain lo > hi");
  if (!std::isfinite(d.lo) || !std::isfinite(d.hi))
    throw std::invalid_argument("merit: eval_domain must be finite");
}

}  // namespace

MeritFunction::MeritFunction(MeritKind kind, double param, Interval domain)
    : kind_(kind), param_(param), domain_(domain) {
  check_domain(domain);
  auto [mn, lip] = constants_on_interval(domain.lo, domain.hi);
  min_merit_ = mn;
  lipschitz_ = lip;
}

MeritFunction MeritFunction::exponential(double c, Interval domain) {
  if (!(c >= 0.0)) throw std::invalid_argument("exponential merit: c must be >= 0");
  return MeritFunction(MeritKind::Exponential, c, domain);
}

MeritFunction MeritFunction::identity(Interval domain) {
  if (!(domain.lo > 0.0))
    throw std::invalid_argument("identity merit: eval_domain must be positive");
  return MeritFunction(MeritKind::Identity, 1.0, domain);
}

MeritFunction MeritFunction::piecewise_linear(double slope, Interval domain) {
  if (!(slope > 0.0)) throw std::invalid_argument("piecewise-linear merit: L must be > 0");
  return MeritFunction(MeritKind::PiecewiseLinear, slope, domain);
}

double MeritFunction::eval(double theta) const {
  if (!std::isfinite(theta)) throw std::domain_error("merit: theta must be finite");
  switch (kind_) {
    case MeritKind::Exponential:
      return std::exp(param_ * theta);
    case MeritKind::Identity:
      if (theta <= 0.0) throw std::domain_error("identity merit: theta must be positive");
      return theta;
    case MeritKind::PiecewiseLinear:
      return theta <= 0.0 ? 1.0 : param_ * theta + 1.0;
  }
  throw std::logic_error("unreachable");
}

double MeritFunction::log_eval(double theta) const {
  if (kind_ == MeritKind::Exponential) {
    if (!std::isfinite(theta)) throw std::domain_error("merit: theta must be finite");
    return param_ * theta;
  }
  return std::log(eval(theta));
}

double MeritFunction::slope(double theta) const {
  switch (kind_) {
    case MeritKind::Exponential:
      return param_ * std::exp(param_ * theta);
    case MeritKind::Identity:
      return 1.0;
    case MeritKind::PiecewiseLinear:
      return theta >= 0.0 ? param_ : 0.0;
  }
  throw std::logic_error("unreachable");
}

std::pair<double, double> MeritFunction::constants_on_interval(double lo, double hi) const {
  if (!(lo <= hi)) throw std::invalid_argument("constants_on_interval: lo > hi");
  if (lo < domain_.lo || hi > domain_.hi)
    throw std::invalid_argument("constants_on_interval: interval outside eval_domain");
  switch (kind_) {
    case MeritKind::Exponential:
      // nondecreasing, so the minimum sits at lo; steepest slope at hi.
      return {std::exp(param_ * lo), param_ * std::exp(param_ * hi)};
    case MeritKind::Identity:
      return {lo, 1.0};
    case MeritKind::PiecewiseLinear:
      return {lo <= 0.0 ? 1.0 : param_ * lo + 1.0, hi > 0.0 ? param_ : 0.0};
  }
  throw std::logic_error("unreachable");
}

std::string MeritFunction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case MeritKind::Exponential: os << "exp(c=" << param_ << ")"; break;
    case MeritKind::Identity: os << "identity"; break;
    case MeritKind::PiecewiseLinear: os << "pwl(L=" << param_ << ")"; break;
  }
  return os.str();
}

}  // namespace fairx
