#include "aclock/errors.hpp"
#include "aclock/noise.hpp"
#include "aclock/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using aclock::Rng;
using aclock::noise::NoiseModel;
namespace noise = aclock::noise;

namespace {

struct Sampled {
  double var_end;
  double var_end_se;
  double var_avg;
  double var_avg_se;
  double cov;
  double cov_se;
  double mean_end;
  double mean_end_se;
};

// Moments of n exact cycle draws with i.i.d. standard errors.
Sampled sample_moments(const NoiseModel& m, double T, int n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<double> e2;
  std::vector<double> a2;
  std::vector<double> ea;
  std::vector<double> e;
  for (int i = 0; i < n; ++i) {
    const auto c = noise::sample_cycle(m, T, r);
    e.push_back(c.end_minus_start);
    e2.push_back(c.end_minus_start * c.end_minus_start);
    a2.push_back(c.avg_minus_start * c.avg_minus_start);
    ea.push_back(c.end_minus_start * c.avg_minus_start);
  }
  const auto se2 = aclock::stats::mean_with_se(e2);
  const auto sa2 = aclock::stats::mean_with_se(a2);
  const auto sea = aclock::stats::mean_with_se(ea);
  const auto se = aclock::stats::mean_with_se(e);
  return {se2.mean, se2.se, sa2.mean, sa2.se, sea.mean, sea.se, se.mean, se.se};
}

} // namespace

TEST(Noise, BrownianEndVariance) {
  const auto s = sample_moments(NoiseModel::brownian(0.5), 2.0, 100000, 1);
  EXPECT_NEAR(s.var_end, 2.0, 4.0 * s.var_end_se);
}

TEST(Noise, BrownianAverageVariance) {
  const auto s = sample_moments(NoiseModel::brownian(0.15), 1.0, 100000, 2);
  EXPECT_NEAR(s.var_avg, 0.1, 4.0 * s.var_avg_se);
}

TEST(Noise, BrownianCovariance) {
  const auto c = noise::cycle_covariance(NoiseModel::brownian(0.3), 2.0);
  EXPECT_DOUBLE_EQ(c.var_end, 1.2);
  EXPECT_DOUBLE_EQ(c.var_avg, 0.4);
  EXPECT_DOUBLE_EQ(c.cov, 0.6);
  const auto s = sample_moments(NoiseModel::brownian(0.3), 2.0, 100000, 3);
  EXPECT_NEAR(s.cov, 0.6, 4.0 * s.cov_se);
}

TEST(Noise, ZeroIsSilentAndMatchesBrownianZero) {
  Rng a(9);
  Rng b(9);
  for (int i = 0; i < 100; ++i) {
    const auto z = noise::sample_cycle(NoiseModel::zero(), 1.0, a);
    const auto w = noise::sample_cycle(NoiseModel::brownian(0.0), 1.0, b);
    ASSERT_EQ(z.end_minus_start, 0.0);
    ASSERT_EQ(z.avg_minus_start, 0.0);
    ASSERT_EQ(w.end_minus_start, 0.0);
    ASSERT_EQ(w.avg_minus_start, 0.0);
  }
  EXPECT_EQ(a(), b());
}

TEST(Noise, MomentsBrownian) {
  const auto m = noise::moments(NoiseModel::brownian(0.3), 2.0);
  EXPECT_NEAR(m.sigma2_lo, 0.4, 1e-15);
  ASSERT_TRUE(m.alpha && m.beta);
  EXPECT_NEAR(*m.alpha, 1.0, 1e-14);
  EXPECT_NEAR(*m.beta, 3.0, 1e-14);
}

TEST(Noise, MomentsZeroHaveNoExponents) {
  const auto m = noise::moments(NoiseModel::zero(), 1.0);
  EXPECT_EQ(m.sigma2_lo, 0.0);
  EXPECT_FALSE(m.alpha);
  EXPECT_FALSE(m.beta);
}

TEST(Noise, MomentsPowerLaw) {
  for (const double a : {0.0, 0.5, 1.0, 2.0, 3.5}) {
    const auto m = noise::moments(NoiseModel::power_law(0.7, a), 1.7);
    EXPECT_NEAR(m.sigma2_lo, 0.7 * std::pow(1.7, a), 1e-13);
    EXPECT_NEAR(*m.alpha, a, 1e-13);
    EXPECT_NEAR(*m.beta, (a + 2.0) * (a + 1.0) / 2.0, 1e-13);
  }
  EXPECT_NEAR(*noise::moments(NoiseModel::power_law(1.0, 0.5), 1.0).beta, 1.875, 1e-14);
}

TEST(Noise, PowerLawAlphaOneEqualsBrownian) {
  // D T^alpha = 2 D' T / 3 at alpha = 1.
  const auto p = noise::cycle_covariance(NoiseModel::power_law(0.2, 1.0), 1.5);
  const auto b = noise::cycle_covariance(NoiseModel::brownian(0.3), 1.5);
  EXPECT_NEAR(p.var_end, b.var_end, 1e-14);
  EXPECT_NEAR(p.var_avg, b.var_avg, 1e-14);
  EXPECT_NEAR(p.cov, b.cov, 1e-14);
}

TEST(Noise, InvalidInputs) {
  EXPECT_THROW(NoiseModel::brownian(-1.0), aclock::InputError);
  EXPECT_THROW(NoiseModel::power_law(1.0, -0.5), aclock::InputError);
  Rng r(1);
  EXPECT_THROW(noise::sample_cycle(NoiseModel::brownian(1.0), 0.0, r), aclock::InputError);
  EXPECT_THROW(noise::moments(NoiseModel::brownian(1.0), -1.0), aclock::InputError);
  EXPECT_THROW(noise::sample_path(NoiseModel::brownian(1.0), 0.0, 1.0, 0, r), aclock::InputError);
}

TEST(Noise, MartingaleZeroMean) {
  const NoiseModel models[] = {NoiseModel::brownian(0.4), NoiseModel::power_law(0.3, 0.5),
                               NoiseModel::power_law(0.3, 0.0), NoiseModel::power_law(0.3, 2.0)};
  std::uint64_t seed = 10;
  for (const auto& m : models) {
    const auto s = sample_moments(m, 1.3, 100000, seed++);
    EXPECT_NEAR(s.mean_end, 0.0, 4.0 * s.mean_end_se) << m.describe();
  }
}

TEST(Noise, BrownianVarianceLinearInTime) {
  const auto s1 = sample_moments(NoiseModel::brownian(0.25), 1.0, 100000, 20);
  const auto s2 = sample_moments(NoiseModel::brownian(0.25), 2.0, 100000, 21);
  EXPECT_NEAR(s2.var_end / s1.var_end, 2.0, 0.1);
}

TEST(Noise, PowerLawBetaByMonteCarlo) {
  for (const double a : {0.0, 0.5, 1.0, 2.0}) {
    const auto s = sample_moments(NoiseModel::power_law(0.5, a), 1.0, 100000, 30);
    const double beta = s.var_end / s.var_avg;
    // delta-method se of the ratio
    const double se = beta * std::hypot(s.var_end_se / s.var_end, s.var_avg_se / s.var_avg);
    EXPECT_NEAR(beta, (a + 2.0) * (a + 1.0) / 2.0, 3.0 * se) << "alpha=" << a;
  }
}

TEST(Noise, PathZeroIsConstant) {
  Rng r(4);
  const auto p = noise::sample_path(NoiseModel::zero(), 0.7, 1.0, 50, r);
  ASSERT_EQ(p.size(), 51u);
  for (const double v : p) {
    EXPECT_EQ(v, 0.7);
  }
}

TEST(Noise, PathFinalValueMeanZero) {
  Rng r(5);
  std::vector<double> last;
  for (int i = 0; i < 20000; ++i) {
    last.push_back(noise::sample_path(NoiseModel::brownian(0.5), 0.0, 1.0, 10, r).back());
  }
  const auto m = aclock::stats::mean_with_se(last);
  EXPECT_NEAR(m.mean, 0.0, 4.0 * m.se);
}

// Fine-step paths reproduce the closed-form cycle covariance, including
// the time-averaged mean square entering the alpha equation.
class PathAgreement : public ::testing::TestWithParam<double> {};

TEST_P(PathAgreement, FinePathMatchesCycleCovariance) {
  const double alpha = GetParam();
  const NoiseModel m = alpha < 0.0 ? NoiseModel::brownian(0.25) : NoiseModel::power_law(0.25, alpha);
  const double T = 1.0;
  const int steps = 1000;
  const int paths = 20000;
  Rng r(77);
  std::vector<double> a2;
  std::vector<double> e2;
  std::vector<double> ea;
  std::vector<double> ms;
  for (int i = 0; i < paths; ++i) {
    const auto p = noise::sample_path(m, 0.0, T, steps, r);
    double avg = 0.0;
    double sq = 0.0;
    for (int k = 0; k < steps; ++k) {
      // Right-endpoint rule: the power-law path jumps at 0+.
      avg += p[k + 1];
      sq += p[k + 1] * p[k + 1];
    }
    avg /= steps;
    sq /= steps;
    a2.push_back(avg * avg);
    e2.push_back(p.back() * p.back());
    ea.push_back(p.back() * avg);
    ms.push_back(sq);
  }
  const auto c = noise::cycle_covariance(m, T);
  const auto mom = noise::moments(m, T);
  const auto sa = aclock::stats::mean_with_se(a2);
  const auto se = aclock::stats::mean_with_se(e2);
  const auto sea = aclock::stats::mean_with_se(ea);
  const auto sms = aclock::stats::mean_with_se(ms);
  // Discretization bias of the right-endpoint rule is O(1/steps).
  const double slack = 2.0 * c.var_end / steps;
  EXPECT_NEAR(sa.mean, c.var_avg, 3.0 * sa.se + slack);
  EXPECT_NEAR(se.mean, c.var_end, 3.0 * se.se);
  EXPECT_NEAR(sea.mean, c.cov, 3.0 * sea.se + slack);
  EXPECT_NEAR(sms.mean, mom.sigma2_lo * (*mom.alpha + 2.0) / 2.0, 3.0 * sms.se + slack);
}

INSTANTIATE_TEST_SUITE_P(Models, PathAgreement, ::testing::Values(-1.0, 0.0, 0.5, 2.0));

TEST(Noise, BrownianPathAverageVariance) {
  Rng r(8);
  std::vector<double> a2;
  for (int i = 0; i < 20000; ++i) {
    const auto p = noise::sample_path(NoiseModel::brownian(0.25), 0.0, 1.0, 1000, r);
    double s = 0.5 * (p.front() + p.back());
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
      s += p[k];
    }
    s /= 1000.0;
    a2.push_back(s * s);
  }
  const auto m = aclock::stats::mean_with_se(a2);
  EXPECT_NEAR(m.mean, 1.0 / 6.0, 4.0 * m.se);
}
