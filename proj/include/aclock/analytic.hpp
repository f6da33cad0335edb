#pragma once

#include <cstddef>
#include <span>
#include <vector>

/// Closed forms for the Gaussian solvable clock, the stationary lower bounds
/// and the interrogation-time optimizer.
namespace aclock::analytic {

/// Gaussian reference with Fisher information F0 read out by the
/// (1 - zeta)-scaled identity estimator, Brownian noise with Var = 2 D t.
struct GaussianClockParams {
  double F0 = 1.0;
  double D = 0.0;
  double zeta = 0.0;
  double T = 1.0;

  /// Throws InputError unless F0 > 0, D >= 0, |zeta| < 1 and T > 0.
  void validate() const;
  /// 2 D T / 3.
  [[nodiscard]] double sigma2_lo() const;
};

struct GaussianState {
  double mean = 0.0;
  double variance = 0.0;
};

/// Variance s^2 added per cycle:
/// (1-zeta)^2/F0 + zeta^2 2DT + (2/3) DT (1 + zeta - 2 zeta^2).
double innovation_variance(const GaussianClockParams& p);

/// One cycle of the loop acting on N(mean, variance): (zeta mean, zeta^2 variance + s^2).
GaussianState transition_map(const GaussianClockParams& p, GaussianState s);

/// Fixed point of transition_map:
/// (1-zeta)/(1+zeta)/F0 + sigma2_lo (1 + zeta + zeta^2)/(1 - zeta^2).
double stationary_variance(const GaussianClockParams& p);

/// T/F0 + 3 T sigma2_lo / (1 - zeta)^2.
double stationary_clock_diffusion(const GaussianClockParams& p);

/// T (sigma2 (1+zeta)/(1-zeta) + sigma2_lo (1 + alpha + zeta)/(1 - zeta)).
/// alpha is ignored when sigma2_lo = 0.
double dick_prediction(double sigma2, double zeta, double sigma2_lo, double alpha, double T);

/// Lower bound on the stationary variance:
/// (1/F)(1-zeta)/(1+zeta) + sigma2_lo (zeta^2 + alpha zeta + beta - 1 - alpha)/(1 - zeta^2).
/// F may be +infinity. Throws InputError for |zeta| >= 1, where the bound
/// has no stationary meaning.
double variance_bound(double F, double sigma2_lo, double alpha, double beta, double zeta);

/// Lower bound on the clock-time diffusion: T/F + T sigma2_lo beta / (1 - zeta)^2.
double diffusion_bound(double F, double sigma2_lo, double beta, double zeta, double T);

/// Minimization of f(T) = A/T + beta D_lo T^(alpha+1) / (1 - zeta)^2, where
/// 1/F_T = A/T^2 and sigma2_lo(T) = D_lo T^alpha.
struct OptimizerInput {
  double A = 1.0;
  double D_lo = 1.0;
  double alpha = 1.0;
  double beta = 3.0;
  double zeta = 0.0;

  /// Throws InputError unless A, D_lo, beta > 0, alpha > -1 and |zeta| < 1.
  void validate() const;
};

struct Optimum {
  double T_star = 0.0;
  double min_diffusion = 0.0;
};

double diffusion_objective(const OptimizerInput& in, double T);
/// Exact minimizer and minimum.
Optimum optimal_interrogation_time(const OptimizerInput& in);
/// Brent minimization of the objective over log T in extended precision.
Optimum minimize_numerically(const OptimizerInput& in);
/// (1/F_T - (alpha+1) sigma2_lo(T) beta/(1-zeta)^2) relative to 1/F_T.
double balance_residual(const OptimizerInput& in, double T);

/// Exponent of N in the optimal clock diffusion when F_T grows as
/// T^2 N^(1+epsilon): -(1+epsilon)(alpha+1)/(alpha+2).
double nspin_exponent(double epsilon, double alpha);
/// Extra exponent gained by entanglement over separable spins:
/// -epsilon (alpha+1)/(alpha+2).
double entanglement_gain_exponent(double epsilon, double alpha);
/// Log-log slope of the optimal diffusion against N for A = A1 N^-(1+epsilon).
double nspin_fitted_slope(const OptimizerInput& base, double epsilon, std::span<const double> Ns);

} // namespace aclock::analytic
