#pragma once

#include "aclock/rng.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

/// Classical single-parameter estimation: outcome families p(a|phi),
/// estimators, priors, Fisher information and the Cramer-Rao family of
/// lower bounds on the quadratic cost E[(phi - phi_hat)^2].
namespace aclock::estimation {

/// Outcome space. Both ends infinite means the whole line.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool is_line() const;
};

/// A parametric family of outcome densities on a one-dimensional space.
struct OutcomeFamily {
  std::function<double(double outcome, double phi)> density;
  std::function<double(double phi, Rng& rng)> sample;
  Interval support;
  /// (centre, width) of the outcome distribution at phi. Used to place
  /// quadrature on line-supported families; defaults to (phi, 1).
  std::function<std::pair<double, double>(double phi)> locate;
};

/// N(phi, variance).
OutcomeFamily gaussian_family(double variance);
/// N(mean(phi), variance); the Fisher information is mean'(phi)^2 / variance.
OutcomeFamily gaussian_location_family(std::function<double(double)> mean, double variance);

struct Estimator {
  std::function<double(double outcome)> map;
  std::optional<double> declared_zeta;
};

/// Phi(a) = (1 - zeta) a, declared zeta-biased.
Estimator scaled_identity(double zeta);

/// Probability masses `weights` at equally spaced `nodes`; the density at a
/// node is weight / spacing.
struct GridDensity {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] double spacing() const;
  [[nodiscard]] double density_at(std::size_t i) const { return weights[i] / spacing(); }
  /// Throws InputError unless nodes are equally spaced and weights are
  /// non-negative (and, when `normalized`, sum to one within 1e-9).
  void validate(bool normalized) const;
};

class Prior {
public:
  struct Gaussian {
    double mean = 0.0;
    double variance = 1.0;
  };

  static Prior gaussian(double mean, double variance);
  static Prior grid(GridDensity density);
  /// Uniform on [lo, hi] discretized with `n` midpoint nodes.
  static Prior uniform(double lo, double hi, std::size_t n = 2048);

  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double variance() const { return variance_; }
  [[nodiscard]] double second_moment() const { return variance_ + mean_ * mean_; }
  [[nodiscard]] bool is_gaussian() const { return std::holds_alternative<Gaussian>(kind_); }
  [[nodiscard]] const std::variant<Gaussian, GridDensity>& kind() const { return kind_; }

  /// Density q(phi). For grid priors, nodes only (see GridDensity).
  [[nodiscard]] double density(double phi) const;
  /// E[g(phi)]: quadrature over mean +- 10 sd for Gaussian, weighted sum for grids.
  [[nodiscard]] double expect(const std::function<double(double)>& g) const;
  double sample(Rng& rng) const;
  /// Grid used for Bayes posteriors and tilde-q: 2048 nodes over +- 8 sd for
  /// Gaussians, the prior's own nodes otherwise.
  [[nodiscard]] GridDensity discretize() const;

private:
  explicit Prior(std::variant<Gaussian, GridDensity> kind);

  std::variant<Gaussian, GridDensity> kind_;
  double mean_ = 0.0;
  double variance_ = 1.0;
  std::vector<double> cdf_;
};

using FisherFn = std::function<double(double phi)>;

/// F(phi) = int (d/dphi log p)^2 p da. The phi-derivative is a central
/// difference with h = max(1e-5, 1e-5 |phi|), checked against step 2h.
double fisher_information(const OutcomeFamily& family, double phi);
FisherFn fisher_function(const OutcomeFamily& family);

/// Posterior-mean estimator E[phi | a] on the prior's Bayes grid.
/// Evaluating it throws NumericalError if the posterior mass underflows.
Estimator optimal_estimator(const OutcomeFamily& family, const Prior& prior);

struct BiasFit {
  double zeta = 0.0;
  double slope = 0.0;
  /// RMS residual of the through-origin fit, relative to RMS(phi).
  double relative_residual = 0.0;
  bool is_affine = false;
  std::vector<double> conditional_means;
};

inline constexpr double kAffineTolerance = 1e-2;

/// Fits E[phi_hat | phi] = (1 - zeta) phi from Monte Carlo means at `phis`.
BiasFit check_bias(const OutcomeFamily& family, const Estimator& estimator,
                   std::span<const double> phis, Rng& rng, std::size_t samples_per_node = 100000);

/// E[1/F(phi)] under the prior; +infinity if F vanishes where the prior has mass.
double cr_bound_unbiased(const Prior& prior, const FisherFn& fisher);
double cr_bound_unbiased(const Prior& prior, const OutcomeFamily& family);

/// (1 - zeta)^2 E[1/F] + zeta^2 E[phi^2].
double cr_bound_zeta(const Prior& prior, const FisherFn& fisher, double zeta);
double cr_bound_zeta(const Prior& prior, const OutcomeFamily& family, double zeta);

/// q~(phi) = int_phi^inf (s - mu) q(s) ds / sigma^2 on the prior's grid.
GridDensity tilde_q(const Prior& prior);

/// F~ = int F(phi) q~(phi)^2 / q(phi) dphi, summed on the tilde_q grid.
double average_fisher(const Prior& prior, const FisherFn& fisher);

/// (1 - zeta)^2 / F~ + zeta^2 E[phi^2]. Requires a zero-mean prior.
double cr_bound_correlated(const Prior& prior, const FisherFn& fisher, double zeta);
double cr_bound_correlated(const Prior& prior, const OutcomeFamily& family, double zeta);

/// 1 / (F~ + 1 / E[phi^2]).
double van_trees_value(double average_fisher, double second_moment);
double van_trees_bound(const Prior& prior, const FisherFn& fisher);
double van_trees_bound(const Prior& prior, const OutcomeFamily& family);

/// Per-chunk sums of a cost Monte Carlo; mergeable for jackknife errors.
struct CostSums {
  double n = 0.0;
  double err2 = 0.0;      // sum (phi - phi_hat)^2
  double err_phi = 0.0;   // sum (phi - phi_hat) phi
  double phi2 = 0.0;      // sum phi^2
  double err4 = 0.0;      // sum (phi - phi_hat)^4

  CostSums& operator+=(const CostSums& o);
  CostSums& operator-=(const CostSums& o);
};

struct CostEstimate {
  double cost = 0.0;
  double cost_se = 0.0;
  /// E[(phi - phi_hat) phi] / E[phi^2] from the same samples.
  double zeta_hat = 0.0;
  double zeta_se = 0.0;
  std::vector<CostSums> chunks;
};

struct Margin {
  double value = 0.0;
  double se = 0.0;

  /// True unless value < -sigmas * se.
  [[nodiscard]] bool consistent(double sigmas = 3.0) const { return value >= -sigmas * se; }
};

/// Monte Carlo E[(phi - phi_hat)^2] with phi ~ prior, a ~ p(.|phi),
/// phi_hat = Phi(a). Samples are drawn in 64 chunks on sub-streams split off
/// `rng`; results do not depend on `threads`.
CostEstimate estimation_cost(const OutcomeFamily& family, const Estimator& estimator,
                             const Prior& prior, std::size_t n_samples, Rng& rng,
                             unsigned threads = 1);

/// cost - [(1 - zeta_hat)^2 / F~ + zeta_hat^2 E[phi^2]] with zeta_hat refitted
/// on each jackknife replicate.
Margin correlated_margin(const CostEstimate& est, double average_fisher, double second_moment);

/// cost - bound with a fixed bound value (i.i.d. standard error).
Margin fixed_margin(const CostEstimate& est, double bound);

} // namespace aclock::estimation
