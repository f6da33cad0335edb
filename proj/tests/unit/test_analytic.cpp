#include "aclock/analytic.hpp"
#include "aclock/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

namespace an = aclock::analytic;

namespace {

std::vector<an::GaussianClockParams> grid() {
  std::vector<an::GaussianClockParams> out;
  for (const double F0 : {0.5, 4.0, 100.0}) {
    for (const double D : {0.0, 0.05, 1.0}) {
      for (const double zeta : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
        for (const double T : {0.1, 1.0, 7.0}) {
          out.push_back({F0, D, zeta, T});
        }
      }
    }
  }
  return out;
}

void expect_rel(double a, double b, double tol) {
  EXPECT_LE(std::abs(a - b), tol * std::max(std::abs(a), std::abs(b))) << a << " vs " << b;
}

} // namespace

TEST(Analytic, StationaryValuesAtReferencePoint) {
  const an::GaussianClockParams p{4.0, 0.05, 0.5, 1.0};
  EXPECT_NEAR(p.sigma2_lo(), 0.1 / 3.0, 1e-16);
  EXPECT_NEAR(an::stationary_variance(p), 1.0 / 12.0 + (0.1 / 3.0) * 1.75 / 0.75, 1e-15);
  EXPECT_NEAR(an::stationary_clock_diffusion(p), 0.25 + 3.0 * (0.1 / 3.0) / 0.25, 1e-15);
}

TEST(Analytic, StationaryVarianceIsFixedPointOfTransitionMap) {
  for (const auto& p : grid()) {
    if (std::abs(p.zeta) > 0.6) {
      continue;
    }
    an::GaussianState s{1.0, 3.0};
    for (int i = 0; i < 200; ++i) {
      s = an::transition_map(p, s);
    }
    expect_rel(s.variance, an::stationary_variance(p), 1e-12);
    EXPECT_LT(std::abs(s.mean), 1e-12);
  }
}

TEST(Analytic, VarianceBoundSaturated) {
  for (const auto& p : grid()) {
    expect_rel(an::variance_bound(p.F0, p.sigma2_lo(), 1.0, 3.0, p.zeta), an::stationary_variance(p),
               1e-12);
  }
}

TEST(Analytic, DiffusionBoundSaturated) {
  for (const auto& p : grid()) {
    expect_rel(an::diffusion_bound(p.F0, p.sigma2_lo(), 3.0, p.zeta, p.T),
               an::stationary_clock_diffusion(p), 1e-12);
  }
}

TEST(Analytic, DickPredictionMatchesClockDiffusion) {
  for (const auto& p : grid()) {
    expect_rel(an::dick_prediction(an::stationary_variance(p), p.zeta, p.sigma2_lo(), 1.0, p.T),
               an::stationary_clock_diffusion(p), 1e-12);
  }
}

TEST(Analytic, NoiselessReferenceBounds) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(an::variance_bound(inf, 0.3, 1.0, 3.0, 0.0), 0.3 * 1.0, 1e-15);
  EXPECT_NEAR(an::diffusion_bound(inf, 0.3, 3.0, 0.0, 2.0), 1.8, 1e-15);
}

TEST(Analytic, ParameterValidation) {
  EXPECT_THROW(an::GaussianClockParams({4.0, 0.05, 1.0, 1.0}).validate(), aclock::InputError);
  EXPECT_THROW(an::GaussianClockParams({4.0, 0.05, -1.0, 1.0}).validate(), aclock::InputError);
  EXPECT_THROW(an::GaussianClockParams({0.0, 0.05, 0.0, 1.0}).validate(), aclock::InputError);
  EXPECT_THROW(an::GaussianClockParams({1.0, -0.1, 0.0, 1.0}).validate(), aclock::InputError);
  EXPECT_THROW(an::stationary_variance({4.0, 0.05, 1.0, 1.0}), aclock::InputError);
  EXPECT_THROW(an::variance_bound(1.0, 0.1, 1.0, 3.0, 1.0), aclock::InputError);
  EXPECT_THROW(an::diffusion_bound(1.0, 0.1, 3.0, -1.2, 1.0), aclock::InputError);
}

TEST(Analytic, OptimizerReferencePoint) {
  const an::OptimizerInput in{0.25, 1.0 / 24.0, 1.0, 3.0, 0.0};
  const auto opt = an::optimal_interrogation_time(in);
  EXPECT_NEAR(opt.T_star, 1.0, 1e-14);
  EXPECT_NEAR(opt.min_diffusion, 0.375, 1e-14);
  EXPECT_NEAR(an::diffusion_objective(in, 1.0), 0.375, 1e-15);
  EXPECT_NEAR(an::balance_residual(in, opt.T_star), 0.0, 1e-12);
}

TEST(Analytic, OptimizerAgreesWithNumericMinimum) {
  for (const double alpha : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    for (const double zeta : {-0.5, 0.0, 0.7}) {
      const an::OptimizerInput in{0.3, 0.02, alpha, (alpha + 1.0) * (alpha + 2.0) / 2.0, zeta};
      const auto closed = an::optimal_interrogation_time(in);
      const auto numeric = an::minimize_numerically(in);
      EXPECT_LT(std::abs(numeric.T_star - closed.T_star) / closed.T_star, 1e-8);
      EXPECT_LT(std::abs(numeric.min_diffusion - closed.min_diffusion) / closed.min_diffusion,
                1e-12);
      EXPECT_LT(std::abs(an::balance_residual(in, closed.T_star)), 1e-10);
      EXPECT_GT(an::diffusion_objective(in, closed.T_star * 1.01), closed.min_diffusion);
      EXPECT_GT(an::diffusion_objective(in, closed.T_star * 0.99), closed.min_diffusion);
    }
  }
}

TEST(Analytic, OptimizerValidation) {
  EXPECT_THROW(an::optimal_interrogation_time({0.0, 1.0, 1.0, 3.0, 0.0}), aclock::InputError);
  EXPECT_THROW(an::optimal_interrogation_time({1.0, 1.0, -1.0, 3.0, 0.0}), aclock::InputError);
  EXPECT_THROW(an::optimal_interrogation_time({1.0, 1.0, 1.0, 3.0, 1.0}), aclock::InputError);
}

TEST(Analytic, NspinExponents) {
  EXPECT_NEAR(an::nspin_exponent(0.0, 1.0), -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(an::nspin_exponent(1.0, 1.0), -4.0 / 3.0, 1e-15);
  EXPECT_NEAR(an::nspin_exponent(1.0, 0.0), -1.0, 1e-15);
  EXPECT_NEAR(an::entanglement_gain_exponent(1.0, 1.0), -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(an::entanglement_gain_exponent(0.0, 1.0), 0.0, 1e-15);
}

TEST(Analytic, NspinFittedSlope) {
  std::vector<double> Ns;
  for (double n = 1.0; n <= 1024.0; n *= 2.0) {
    Ns.push_back(n);
  }
  for (const double eps : {0.0, 0.5, 1.0}) {
    for (const double alpha : {0.0, 1.0, 2.0}) {
      const an::OptimizerInput base{0.25, 0.05, alpha, 3.0, 0.2};
      const double slope = an::nspin_fitted_slope(base, eps, Ns);
      const double expected = an::nspin_exponent(eps, alpha);
      EXPECT_LT(std::abs(slope - expected), 0.01 * std::abs(expected));
    }
  }
}
