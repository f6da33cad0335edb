#include "aclock/rng.hpp"
#include "aclock/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using aclock::Rng;

TEST(Rng, SameSeedSameStream) {
  Rng a(7);
  Rng b(7);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a(), b());
  }
}

TEST(Rng, DifferentStreamsDiffer) {
  Rng a(7, 0);
  Rng b(7, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) {
    equal += a() == b() ? 1 : 0;
  }
  EXPECT_EQ(equal, 0);
}

TEST(Rng, SplitDoesNotAdvanceParent) {
  Rng a(3);
  Rng b(3);
  (void)a.split(5);
  EXPECT_EQ(a(), b());
  EXPECT_EQ(a.split(2)(), b.split(2)());
  EXPECT_NE(a.split(2)(), a.split(3)());
}

TEST(Rng, UniformIsOpenUnitInterval) {
  Rng r(11);
  double lo = 1.0;
  double hi = 0.0;
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, NormalMoments) {
  Rng r(2024);
  const int n = 400000;
  std::vector<double> x(n);
  for (auto& v : x) {
    v = r.normal();
  }
  const auto m = aclock::stats::mean_with_se(x);
  EXPECT_NEAR(m.mean, 0.0, 4.0 * m.se);
  double m2 = 0.0;
  double m4 = 0.0;
  for (const double v : x) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m2 /= n;
  m4 /= n;
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}
