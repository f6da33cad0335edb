#include "aclock/errors.hpp"
#include "aclock/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace num = aclock::numerics;

TEST(Numerics, IntegratePolynomial) {
  EXPECT_NEAR(num::integrate([](double x) { return x * x; }, 0.0, 3.0), 9.0, 1e-12);
}

TEST(Numerics, IntegrateLineGaussian) {
  const auto g = [](double x) { return std::exp(-0.5 * (x - 40.0) * (x - 40.0) / 1e-6); };
  const double expected = std::sqrt(2.0 * std::numbers::pi * 1e-6);
  EXPECT_NEAR(num::integrate_line(g, 40.0, 1e-3), expected, 1e-10);
}

TEST(Numerics, NonFiniteIntegrandThrows) {
  EXPECT_THROW(num::integrate([](double) { return std::nan(""); }, 0.0, 1.0), aclock::NumericalError);
}
