#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fairx/merit.hpp"
#include "fairx/rng.hpp"

using namespace fairx;

namespace {

// Taylor-series exponential, the independent oracle for exp-family values.
double exp_series(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= x / k;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

TEST_CASE("merit evaluation on the three families") {
  const auto pwl = MeritFunction::piecewise_linear(3.0);
  CHECK(pwl.eval(0.0) == doctest::Approx(1.0));  // flat branch value at the kink
  CHECK(pwl.eval(-0.5) == doctest::Approx(1.0));
  CHECK(pwl.eval(0.5) == doctest::Approx(2.5));

  const auto exp4 = MeritFunction::exponential(4.0);
  CHECK(exp4.eval(0.0) == doctest::Approx(1.0));

  const auto exp2 = MeritFunction::exponential(2.0);
  CHECK(exp2.eval(0.5) == doctest::Approx(exp_series(1.0)).epsilon(1e-12));
  CHECK(exp2.eval(0.5) == doctest::Approx(2.718281828459045).epsilon(1e-12));

  const auto ident = MeritFunction::identity({0.1, 2.0});
  CHECK(ident.eval(1.5) == doctest::Approx(1.5));
  CHECK_THROWS_AS(ident.eval(0.0), std::domain_error);
  CHECK_THROWS_AS(ident.eval(-1.0), std::domain_error);
  CHECK_THROWS_AS(exp4.eval(std::nan("")), std::domain_error);
}

TEST_CASE("log_eval avoids overflow for steep exponentials") {
  const auto steep = MeritFunction::exponential(12.0);
  CHECK(steep.log_eval(100.0) == doctest::Approx(1200.0));  // exp(1200) would overflow
  const auto pwl = MeritFunction::piecewise_linear(5.0);
  CHECK(pwl.log_eval(0.2) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("constants_on_interval") {
  const auto exp0 = MeritFunction::exponential(0.0);
  auto [m0, l0] = exp0.constants_on_interval(-1.0, 1.0);
  CHECK(m0 == doctest::Approx(1.0));
  CHECK(l0 == doctest::Approx(0.0));

  const auto pwl5 = MeritFunction::piecewise_linear(5.0);
  auto [m5, l5] = pwl5.constants_on_interval(-1.0, 1.0);
  CHECK(m5 == doctest::Approx(1.0));
  CHECK(l5 == doctest::Approx(5.0));

  const auto exp1 = MeritFunction::exponential(1.0, {-1.0, 1.0});
  auto [m1, l1] = exp1.constants_on_interval(0.0, 1.0);
  CHECK(m1 == doctest::Approx(1.0));
  CHECK(l1 == doctest::Approx(std::exp(1.0)));

  // dense difference quotients never exceed the declared Lipschitz constant,
  // and the declared minimum is attained
  double max_quot = 0.0, min_val = 1e300;
  for (int i = 0; i <= 2000; ++i) {
    const double x = 0.0 + i * (1.0 / 2000.0);
    min_val = std::min(min_val, exp1.eval(x));
    if (i > 0) {
      const double prev = 0.0 + (i - 1) * (1.0 / 2000.0);
      max_quot = std::max(max_quot, std::abs(exp1.eval(x) - exp1.eval(prev)) / (x - prev));
    }
  }
  CHECK(max_quot <= l1 + 1e-9);
  CHECK(min_val == doctest::Approx(m1));

  CHECK_THROWS_AS(exp1.constants_on_interval(-2.0, 0.0), std::invalid_argument);
}

TEST_CASE("declared constants hold over random draws") {
  Rng rng = derive_rng({42});
  const MeritFunction funcs[] = {
      MeritFunction::exponential(4.0),
      MeritFunction::piecewise_linear(7.0),
      MeritFunction::identity({0.05, 1.0}),
  };
  for (const auto& f : funcs) {
    const auto dom = f.eval_domain();
    double prev_x = dom.lo, prev_v = f.eval(dom.lo);
    for (int i = 0; i < 10000; ++i) {
      const double x = dom.lo + draw_uniform(rng) * dom.width();
      const double v = f.eval(x);
      CHECK(v >= f.min_merit() - 1e-12);
      CHECK(std::abs(v - prev_v) <= f.lipschitz() * std::abs(x - prev_x) + 1e-12);
      // monotone
      if (x >= prev_x) CHECK(v >= prev_v - 1e-12);
      else CHECK(v <= prev_v + 1e-12);
      prev_x = x;
      prev_v = v;
    }
  }
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(MeritFunction::exponential(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(MeritFunction::identity({-0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MeritFunction::piecewise_linear(0.0), std::invalid_argument);
  CHECK_THROWS_AS(MeritFunction::exponential(1.0, {1.0, -1.0}), std::invalid_argument);
}
