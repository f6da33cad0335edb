#include "aclock/stats.hpp"

#include "aclock/errors.hpp"

#include <vector>

namespace aclock::stats {

MeanEstimate mean_with_se(std::span<const double> xs) {
  if (xs.empty()) {
    throw InputError("mean_with_se: empty sample");
  }
  CompensatedSum s;
  for (double x : xs) {
    s.add(x);
  }
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  if (xs.size() < 2) {
    return {mean, std::numeric_limits<double>::quiet_NaN()};
  }
  CompensatedSum ss;
  for (double x : xs) {
    ss.add((x - mean) * (x - mean));
  }
  return {mean, std::sqrt(ss.value() / (n - 1.0) / n)};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw InputError("fit_line: need at least three paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) {
    throw InputError("fit_line: degenerate abscissae");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.residual_variance = rss / (n - 2.0);
  fit.slope_se = std::sqrt(fit.residual_variance / sxx);
  return fit;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx;
  std::vector<double> ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) {
      throw InputError("log_log_slope: values must be positive");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly).slope;
}

} // namespace aclock::stats
