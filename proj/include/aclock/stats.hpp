#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace aclock::stats {

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean with the i.i.d. standard error.
MeanEstimate mean_with_se(std::span<const double> xs);

/// Kahan-Babuska (Neumaier) compensated sum.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Pairwise reduction of chunk accumulators in index order. The result is
/// independent of how the chunks were produced.
template <typename Acc>
Acc pairwise_sum(std::span<const Acc> chunks) {
  if (chunks.empty()) {
    throw std::invalid_argument("pairwise_sum: no chunks");
  }
  if (chunks.size() == 1) {
    return chunks.front();
  }
  const std::size_t half = chunks.size() / 2;
  Acc left = pairwise_sum(chunks.first(half));
  left += pairwise_sum(chunks.subspan(half));
  return left;
}

struct JackknifeResult {
  std::vector<double> estimate;
  std::vector<double> se;
};

/// Delete-one jackknife over chunk accumulators. `statistic` maps an
/// accumulator to a flat vector of estimates; the estimate reported is the
/// statistic of the pooled total, and the standard errors come from the
/// leave-one-chunk-out replicates.
template <typename Acc, typename Statistic>
JackknifeResult jackknife(std::span<const Acc> chunks, Statistic&& statistic) {
  const Acc total = pairwise_sum(chunks);
  JackknifeResult out;
  out.estimate = statistic(total);
  const std::size_t m = chunks.size();
  const std::size_t k = out.estimate.size();
  out.se.assign(k, std::numeric_limits<double>::quiet_NaN());
  if (m < 2) {
    return out;
  }
  std::vector<std::vector<double>> replicates;
  replicates.reserve(m);
  for (const Acc& chunk : chunks) {
    Acc loo = total;
    loo -= chunk;
    replicates.push_back(statistic(loo));
  }
  for (std::size_t j = 0; j < k; ++j) {
    double mean = 0.0;
    for (const auto& r : replicates) {
      mean += r[j];
    }
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (const auto& r : replicates) {
      ss += (r[j] - mean) * (r[j] - mean);
    }
    out.se[j] = std::sqrt(ss * static_cast<double>(m - 1) / static_cast<double>(m));
  }
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_variance = 0.0;
  double slope_se = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

} // namespace aclock::stats
