#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fairx/algos.hpp"
#include "fairx/envs.hpp"

using namespace fairx;

namespace {

const std::optional<Eigen::MatrixXd> kNoCtx = std::nullopt;

Eigen::MatrixXd one_hot_contexts(int k) {
  return Eigen::MatrixXd::Identity(k, k);
}

}  // namespace

TEST_CASE("ucb width") {
  CHECK(ucb_width(4.0, 4) == doctest::Approx(2.0));
  CHECK(ucb_width(1.0, 4) == doctest::Approx(0.5 * ucb_width(1.0, 1)));  // halves at 4x pulls
  // alpha = sqrt(2 ln(4TK/delta)) at T=100, K=2, delta=0.1
  const double alpha = std::sqrt(2.0 * std::log(4.0 * 100 * 2 / 0.1));
  CHECK(alpha == doctest::Approx(4.2396218748).epsilon(1e-9));
  CHECK_THROWS_AS(ucb_width(1.0, 0), std::logic_error);
}

TEST_CASE("fairx-ucb initialization pulls each arm once, then full support") {
  Rng rng = derive_rng({71});
  const auto exp4 = MeritFunction::exponential(4.0);
  FairXUcb algo(3, exp4, 0.5);
  for (int t = 1; t <= 3; ++t) {
    const Policy pi = algo.select(kNoCtx, t, rng);
    CHECK(pi.probs[t - 1] == doctest::Approx(1.0));  // lowest-index unpulled
    algo.update(t - 1, 0.5, std::nullopt);
  }
  CHECK(algo.stats().count(0) == 1);
  CHECK(algo.stats().mean(0) == doctest::Approx(0.5));
  const Policy pi = algo.select(kNoCtx, 4, rng);
  pi.validate(1e-9);
  for (double p : pi.probs) CHECK(p > 0.0);
}

TEST_CASE("update ordering and drawability guards") {
  Rng rng = derive_rng({72});
  const auto exp4 = MeritFunction::exponential(4.0);
  FairXUcb algo(2, exp4, 0.5);
  CHECK_THROWS_AS(algo.update(0, 1.0, std::nullopt), std::logic_error);
  const Policy pi = algo.select(kNoCtx, 1, rng);
  CHECK(pi.probs[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(algo.update(1, 1.0, std::nullopt), std::logic_error);  // not drawable
  algo.update(0, 1.0, std::nullopt);
  CHECK(algo.stats().mean(0) == doctest::Approx(1.0));
}

TEST_CASE("update touches only the chosen arm") {
  Rng rng = derive_rng({73});
  const auto exp4 = MeritFunction::exponential(4.0);
  FairXTs algo(3, exp4, 0.0, 1.0, 1.0);
  algo.select(kNoCtx, 1, rng);
  algo.update(1, 0.9, std::nullopt);
  CHECK(algo.posterior().mean(0) == doctest::Approx(0.0));
  CHECK(algo.posterior().mean(1) == doctest::Approx(0.45));
  CHECK(algo.posterior().mean(2) == doctest::Approx(0.0));
}

TEST_CASE("fairx-ts with a collapsed posterior is the exact fair policy") {
  Rng rng = derive_rng({74});
  const auto ident = MeritFunction::identity({0.5, 2.5});
  PerArmPosterior collapsed({1.0, 2.0}, {1e-24, 1e-24});
  FairXTs algo(ident, collapsed, 1.0);
  const Policy pi = algo.select(kNoCtx, 1, rng);
  CHECK(pi.probs[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(pi.probs[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("steep merit concentrates fairx-ts on the argmax arm") {
  Rng rng = derive_rng({75});
  const auto exp50 = MeritFunction::exponential(50.0);
  PerArmPosterior collapsed({0.2, 0.5, 0.9}, {1e-24, 1e-24, 1e-24});
  FairXTs algo(exp50, collapsed, 1.0);
  const Policy pi = algo.select(kNoCtx, 1, rng);
  CHECK(pi.probs[2] >= 0.99);
}

TEST_CASE("conventional baselines return point masses") {
  Rng rng = derive_rng({76});
  UcbBaseline ucb(2, 0.5);
  ucb.select(kNoCtx, 1, rng);
  ucb.update(0, 0.0, std::nullopt);
  ucb.select(kNoCtx, 2, rng);
  ucb.update(1, 1.0, std::nullopt);
  // equal counts, means (0,1): argmax of mean + width is arm 1
  const Policy pi = ucb.select(kNoCtx, 3, rng);
  CHECK(pi.probs[1] == doctest::Approx(1.0));

  TsBaseline ts(3, 0.0, 1.0, 1.0);
  for (int t = 1; t <= 20; ++t) {
    const Policy p = ts.select(kNoCtx, t, rng);
    int ones = 0;
    for (double v : p.probs) {
      CHECK((v == 0.0 || v == 1.0));
      ones += v == 1.0;
    }
    CHECK(ones == 1);
    ts.update(p.sample(rng), 0.5, std::nullopt);
  }
}

TEST_CASE("fairx-eg mixes the greedy fair policy with uniform") {
  Rng rng = derive_rng({77});
  const auto exp2 = MeritFunction::exponential(2.0);
  FairXEg pure(3, exp2, 1.0);  // epsilon = 1: uniform
  const Policy pi = pure.select(kNoCtx, 1, rng);
  for (double p : pi.probs) CHECK(p == doctest::Approx(1.0 / 3.0));

  FairXEg eg(2, exp2, 0.5);
  const Policy init = eg.select(kNoCtx, 1, rng);
  // unpulled arms: greedy branch is the initialization point mass
  CHECK(init.probs[0] == doctest::Approx(0.5 * 1.0 + 0.25));
  CHECK(init.probs[1] == doctest::Approx(0.25));
  eg.update(init.sample(rng), 1.0, std::nullopt);
}

TEST_CASE("fixed seed reproduces the whole trajectory") {
  const auto exp4 = MeritFunction::exponential(4.0);
  const MabInstance inst({0.2, 0.5, 0.8}, RewardNoise::bernoulli());
  auto run = [&](std::uint64_t seed) {
    Rng rng = derive_rng({seed});
    FairXTs algo(3, exp4, 0.0, 1.0, 0.5);
    std::vector<double> trail;
    for (int t = 1; t <= 200; ++t) {
      const Policy pi = algo.select(kNoCtx, t, rng);
      const int arm = pi.sample(rng);
      const double r = inst.pull(arm, rng);
      algo.update(arm, r, std::nullopt);
      trail.push_back(pi.probs[0]);
      trail.push_back(arm);
      trail.push_back(r);
    }
    return trail;
  };
  CHECK(run(11) == run(11));
  CHECK(run(11) != run(12));
}

TEST_CASE("fairx-lints on one-hot contexts matches fairx-ts posteriors") {
  // the MAB-as-linear reduction: K basis vectors, lambda = 1, unit noise
  Rng rng = derive_rng({78});
  const int k = 4;
  const auto exp2 = MeritFunction::exponential(2.0);
  FairXTs ts(k, exp2, 0.0, 1.0, 1.0);
  FairXLinTs lints(k, k, exp2, 1.0, 1.0);
  const Eigen::MatrixXd ctx = one_hot_contexts(k);

  Rng play = derive_rng({79});
  for (int t = 1; t <= 300; ++t) {
    ts.select(kNoCtx, t, rng);
    lints.select(ctx, t, rng);
    const int arm = static_cast<int>(play() % k);
    const double reward = draw_normal(play) * 0.3 + 0.1 * arm;
    ts.update(arm, reward, std::nullopt);
    lints.update(arm, reward, Eigen::VectorXd(ctx.row(arm)));
  }
  const Eigen::VectorXd post_mean = lints.posterior().mean();
  for (int a = 0; a < k; ++a)
    CHECK(post_mean(a) == doctest::Approx(ts.posterior().mean(a)).epsilon(1e-12));
}

TEST_CASE("linear policies validate their context inputs") {
  Rng rng = derive_rng({80});
  const auto exp2 = MeritFunction::exponential(2.0);
  FairXLinUcb algo(3, 2, exp2, 1.0, 0.5);
  CHECK_THROWS_AS(algo.select(kNoCtx, 1, rng), std::invalid_argument);
  Eigen::MatrixXd wrong(2, 2);
  wrong.setZero();
  CHECK_THROWS_AS(algo.select(std::optional<Eigen::MatrixXd>(wrong), 1, rng),
                  std::invalid_argument);

  FairXUcb mab(2, exp2, 0.5);
  Eigen::MatrixXd ctx(2, 2);
  ctx.setZero();
  CHECK_THROWS_AS(mab.select(std::optional<Eigen::MatrixXd>(ctx), 1, rng),
                  std::invalid_argument);
}

TEST_CASE("fairx-linucb and fairx-lineg produce full-support policies") {
  Rng rng = derive_rng({81});
  const auto exp2 = MeritFunction::exponential(2.0);
  const int k = 4, d = 3;
  FairXLinUcb linucb(d, k, exp2, 1.0, 0.5);
  FairXLinEg lineg(d, k, exp2, 0.01, 1.0);
  LinUcbBaseline base(d, k, 1.0, 0.5);
  LinTsBaseline lints(d, k, 1.0, 1.0);

  Eigen::VectorXd theta_star(d);
  theta_star << 0.6, -0.3, 0.2;
  SyntheticLinearEnv env(theta_star, k, 0.05);
  for (int t = 1; t <= 50; ++t) {
    const auto ctx = env.begin_round(rng);
    for (BanditAlgorithm* algo :
         {static_cast<BanditAlgorithm*>(&linucb), static_cast<BanditAlgorithm*>(&lineg),
          static_cast<BanditAlgorithm*>(&base), static_cast<BanditAlgorithm*>(&lints)}) {
      const Policy pi = algo->select(ctx, t, rng);
      pi.validate(1e-9);
      if (algo == static_cast<BanditAlgorithm*>(&linucb) ||
          algo == static_cast<BanditAlgorithm*>(&lineg)) {
        for (double p : pi.probs) CHECK(p > 0.0);
      } else {
        // conventional baselines always deploy a point mass
        int ones = 0;
        for (double p : pi.probs) ones += p == 1.0;
        CHECK(ones == 1);
      }
      const int arm = pi.sample(rng);
      algo->update(arm, env.pull(arm, rng), Eigen::VectorXd(ctx->row(arm)));
    }
  }
}

TEST_CASE("beta schedule mode tracks the theoretical radius") {
  const auto exp2 = MeritFunction::exponential(2.0);
  FairXLinUcb scheduled(3, 2, exp2, 1.0, BetaSchedule{1.0, 0.1});
  CHECK(scheduled.beta_at(1) == doctest::Approx(beta_schedule(1, 3, 1.0, 0.1)));
  CHECK(scheduled.beta_at(100) == doctest::Approx(beta_schedule(100, 3, 1.0, 0.1)));
  FairXLinUcb fixed(3, 2, exp2, 1.0, 0.7);
  CHECK(fixed.beta_at(1) == doctest::Approx(0.7));
  CHECK(fixed.beta_at(1000) == doctest::Approx(0.7));
}

TEST_CASE("factory builds every named algorithm and rejects junk") {
  const auto exp2 = MeritFunction::exponential(2.0);
  const AlgoShape mab{3, 0};
  const AlgoShape lin{3, 4};
  const PgdConfig pgd;
  for (const char* name : {"fairx_ucb", "fairx_ts", "fairx_eg", "ucb", "ts"}) {
    auto algo = make_algorithm(name, {}, mab, exp2, pgd);
    CHECK(algo->name() == name);
    CHECK_FALSE(algo->needs_contexts());
  }
  for (const char* name : {"fairx_linucb", "fairx_lints", "fairx_lineg", "linucb", "lints"}) {
    auto algo = make_algorithm(name, {}, lin, exp2, pgd);
    CHECK(algo->name() == name);
    CHECK(algo->needs_contexts());
  }
  // theory mode swaps the fixed radius for the schedule and its parameters
  auto scheduled = make_algorithm("fairx_linucb", {{"lambda", 1.0}, {"W", 1.0}, {"delta", 0.1}},
                                  lin, exp2, pgd, /*beta_schedule_mode=*/true);
  auto* as_linucb = dynamic_cast<FairXLinUcb*>(scheduled.get());
  REQUIRE(as_linucb != nullptr);
  CHECK(as_linucb->beta_at(7) == doctest::Approx(beta_schedule(7, 4, 1.0, 0.1)));

  CHECK_THROWS_AS(make_algorithm("zorp", {}, mab, exp2, pgd), std::invalid_argument);
  CHECK_THROWS_AS(make_algorithm("fairx_ucb", {{"beta", 1.0}}, mab, exp2, pgd),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_algorithm("fairx_ucb", {}, mab, std::nullopt, pgd),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_algorithm("fairx_linucb", {}, mab, exp2, pgd), std::invalid_argument);
}
