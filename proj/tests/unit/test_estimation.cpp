#include "aclock/errors.hpp"
#include "aclock/estimation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using aclock::Rng;
namespace est = aclock::estimation;

namespace {

// p(a|phi) = 1 + phi (2a - 1) on [0, 1]; F(0) = 1/3.
est::OutcomeFamily tilted_uniform() {
  est::OutcomeFamily f;
  f.support = {0.0, 1.0};
  f.density = [](double a, double phi) { return 1.0 + phi * (2.0 * a - 1.0); };
  f.sample = [](double phi, Rng& rng) {
    for (;;) {
      const double a = rng.uniform();
      if (rng.uniform() * (1.0 + std::abs(phi)) < 1.0 + phi * (2.0 * a - 1.0)) {
        return a;
      }
    }
  };
  return f;
}

} // namespace

TEST(Estimation, GaussianFisher) {
  const auto fam = est::gaussian_family(0.25);
  for (const double phi : {-1.0, 0.0, 0.3, 5.0}) {
    EXPECT_NEAR(est::fisher_information(fam, phi), 4.0, 1e-6);
  }
}

TEST(Estimation, LocationFamilyFisher) {
  const auto fam = est::gaussian_location_family([](double phi) { return 2.0 * phi; }, 1.0);
  EXPECT_NEAR(est::fisher_information(fam, 0.7), 4.0, 1e-6);
}

TEST(Estimation, FiniteSupportFisher) {
  const auto fam = tilted_uniform();
  EXPECT_NEAR(est::fisher_information(fam, 0.0), 1.0 / 3.0, 1e-7);
  const double u = 0.5;
  const double closed = (std::log((1.0 + u) / (1.0 - u)) - 2.0 * u) / (2.0 * u * u * u);
  EXPECT_NEAR(est::fisher_information(fam, u), closed, 1e-7);
}

TEST(Estimation, OptimalEstimatorGaussianIsLinear) {
  const auto fam = est::gaussian_family(0.25);
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  const auto phi_hat = est::optimal_estimator(fam, prior);
  for (const double a : {-2.0, -0.5, 0.0, 0.4, 1.5}) {
    EXPECT_NEAR(phi_hat.map(a), 0.8 * a, 1e-6);
  }
}

TEST(Estimation, CheckBiasRecoversZeta) {
  const auto fam = est::gaussian_family(0.25);
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  const std::vector<double> phis{-1.0, -0.5, 0.5, 1.0};
  Rng rng(3);
  const auto fit = est::check_bias(fam, est::optimal_estimator(fam, prior), phis, rng, 20000);
  EXPECT_NEAR(fit.zeta, 0.2, 0.01);
  EXPECT_TRUE(fit.is_affine);

  Rng rng2(4);
  const auto fit2 = est::check_bias(fam, est::scaled_identity(0.5), phis, rng2, 20000);
  EXPECT_NEAR(fit2.zeta, 0.5, 0.01);
  EXPECT_TRUE(fit2.is_affine);
}

TEST(Estimation, CheckBiasFlagsNonAffine) {
  const auto fam = est::gaussian_family(0.01);
  const est::Estimator cubic{[](double a) { return a * a * a; }, std::nullopt};
  const std::vector<double> phis{-2.0, -1.0, 1.0, 2.0, 0.5};
  Rng rng(5);
  EXPECT_FALSE(est::check_bias(fam, cubic, phis, rng, 5000).is_affine);
}

TEST(Estimation, CramerRaoBounds) {
  const auto fam = est::gaussian_family(0.25);
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  EXPECT_NEAR(est::cr_bound_unbiased(prior, fam), 0.25, 1e-6);
  EXPECT_NEAR(est::cr_bound_zeta(prior, fam, 0.5), 0.3125, 1e-6);
}

TEST(Estimation, VanishingFisherGivesInfiniteBound) {
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  EXPECT_TRUE(std::isinf(est::cr_bound_unbiased(prior, [](double) { return 0.0; })));
}

TEST(Estimation, TildeQGaussianEqualsPrior) {
  const auto prior = est::Prior::gaussian(0.0, 2.0);
  const auto tq = est::tilde_q(prior);
  const double h = tq.spacing();
  for (std::size_t i = 0; i < tq.nodes.size(); i += 97) {
    const double x = tq.nodes[i];
    const double q = std::exp(-x * x / 4.0) / std::sqrt(4.0 * M_PI);
    EXPECT_NEAR(tq.weights[i] / h, q, 1e-10) << x;
  }
}

TEST(Estimation, TildeQUniform) {
  const auto prior = est::Prior::uniform(-1.0, 1.0, 4000);
  const auto tq = est::tilde_q(prior);
  const double h = tq.spacing();
  double worst = 0.0;
  for (std::size_t i = 0; i < tq.nodes.size(); ++i) {
    const double x = tq.nodes[i];
    worst = std::max(worst, std::abs(tq.weights[i] / h - 0.75 * (1.0 - x * x)));
  }
  EXPECT_LT(worst, 2e-3);
}

TEST(Estimation, AverageFisherAndVanTrees) {
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  const est::FisherFn four = [](double) { return 4.0; };
  EXPECT_NEAR(est::average_fisher(prior, four), 4.0, 1e-6);
  EXPECT_NEAR(est::van_trees_bound(prior, four), 0.2, 1e-7);
  // The correlated bound at the optimal zeta coincides with van Trees.
  EXPECT_NEAR(est::cr_bound_correlated(prior, four, 0.2), 0.2, 1e-7);
  EXPECT_NEAR(est::cr_bound_correlated(prior, four, 0.5), 0.3125, 1e-7);
}

TEST(Estimation, AverageFisherUniformPrior) {
  // F~ = F int q~^2 / q = 6/5 F for the uniform prior on [-1, 1].
  const auto prior = est::Prior::uniform(-1.0, 1.0, 4000);
  EXPECT_NEAR(est::average_fisher(prior, [](double) { return 2.0; }), 2.4, 5e-3);
}

TEST(Estimation, CorrelatedBoundNeedsZeroMean) {
  const auto prior = est::Prior::gaussian(1.0, 1.0);
  EXPECT_THROW(est::cr_bound_correlated(prior, [](double) { return 1.0; }, 0.1),
               aclock::InputError);
}

TEST(Estimation, CostOfOptimalEstimatorMeetsVanTrees) {
  const auto fam = est::gaussian_family(0.25);
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  Rng rng(11);
  const auto c = est::estimation_cost(fam, est::optimal_estimator(fam, prior), prior, 100000, rng);
  EXPECT_NEAR(c.cost, 0.2, 4.0 * c.cost_se);
  EXPECT_NEAR(c.zeta_hat, 0.2, 4.0 * c.zeta_se);
  EXPECT_TRUE(est::correlated_margin(c, 4.0, 1.0).consistent());
}

TEST(Estimation, CostOfScaledEstimator) {
  const auto fam = est::gaussian_family(0.25);
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  Rng rng(12);
  const auto c = est::estimation_cost(fam, est::scaled_identity(0.5), prior, 100000, rng);
  EXPECT_NEAR(c.cost, 0.3125, 4.0 * c.cost_se);
  const auto m = est::fixed_margin(c, 0.3125);
  EXPECT_TRUE(m.consistent());
  EXPECT_LT(std::abs(m.value), 4.0 * m.se);
}

TEST(Estimation, CostIndependentOfThreads) {
  const auto fam = est::gaussian_family(0.5);
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  Rng a(21);
  Rng b(21);
  const auto c1 = est::estimation_cost(fam, est::scaled_identity(0.1), prior, 6400, a, 1);
  const auto c4 = est::estimation_cost(fam, est::scaled_identity(0.1), prior, 6400, b, 4);
  EXPECT_EQ(c1.cost, c4.cost);
  EXPECT_EQ(c1.cost_se, c4.cost_se);
  EXPECT_EQ(c1.zeta_hat, c4.zeta_hat);
}

TEST(Estimation, InvalidInputs) {
  EXPECT_THROW(est::gaussian_family(0.0), aclock::InputError);
  EXPECT_THROW(est::Prior::gaussian(0.0, -1.0), aclock::InputError);
  EXPECT_THROW(est::Prior::uniform(1.0, 1.0), aclock::InputError);
  EXPECT_THROW(est::Prior::grid({{0.0, 1.0, 3.0}, {0.3, 0.3, 0.4}}), aclock::InputError);
  EXPECT_THROW(est::Prior::grid({{0.0, 1.0, 2.0}, {0.5, 0.6, -0.1}}), aclock::InputError);
  const auto fam = est::gaussian_family(1.0);
  const auto prior = est::Prior::gaussian(0.0, 1.0);
  Rng rng(1);
  const std::vector<double> same{0.5, 0.5};
  EXPECT_THROW(est::check_bias(fam, est::scaled_identity(0.0), same, rng, 10), aclock::InputError);
  EXPECT_THROW(est::estimation_cost(fam, est::scaled_identity(0.0), prior, 10, rng),
               aclock::InputError);
}

TEST(Estimation, VanTreesIsMinimumOverZeta) {
  const auto prior = est::Prior::gaussian(0.0, 0.5);
  const est::FisherFn fisher = [](double phi) { return 3.0 + std::cos(phi); };
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 1000; ++k) {
    best = std::min(best, est::cr_bound_correlated(prior, fisher, k / 1000.0));
  }
  const double vt = est::van_trees_bound(prior, fisher);
  EXPECT_LE(vt, best * (1.0 + 1e-12));
  EXPECT_NEAR(best, vt, 1e-6 * vt);
}

TEST(Estimation, PointMassPriorGivesZeroEstimate) {
  const auto fam = est::gaussian_family(1.0);
  const auto prior = est::Prior::gaussian(0.0, 1e-10);
  const auto phi_hat = est::optimal_estimator(fam, prior);
  for (const double a : {-3.0, 0.0, 2.0}) {
    EXPECT_NEAR(phi_hat.map(a), 0.0, 1e-8);
  }
}

TEST(Estimation, OptimalEstimatorBeatsPerturbations) {
  const auto fam = est::gaussian_family(0.5);
  const auto prior = est::Prior::uniform(-1.0, 1.0, 512);
  const auto opt = est::optimal_estimator(fam, prior);
  Rng base(31);
  const auto run = [&](const est::Estimator& e) {
    Rng r = base;
    return est::estimation_cost(fam, e, prior, 40000, r);
  };
  const auto c0 = run(opt);
  for (const double eps : {-0.1, 0.1}) {
    const est::Estimator bumped{[&opt, eps](double a) { return opt.map(a) + eps * std::sin(3.0 * a); },
                                std::nullopt};
    const auto c1 = run(bumped);
    EXPECT_LT(c0.cost, c1.cost) << eps;
  }
  const est::Estimator shrunk{[&opt](double a) { return 0.9 * opt.map(a); }, std::nullopt};
  EXPECT_LT(c0.cost, run(shrunk).cost);
}
