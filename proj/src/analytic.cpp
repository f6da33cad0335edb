#include "aclock/analytic.hpp"

#include "aclock/errors.hpp"
#include "aclock/stats.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>

namespace aclock::analytic {

namespace {

void require_stable(double zeta) {
  if (!(std::abs(zeta) < 1.0)) {
    std::ostringstream msg;
    msg << "zeta must satisfy |zeta| < 1, got " << zeta;
    throw InputError(msg.str());
  }
}

double inverse(double F) {
  if (!(F > 0.0)) {
    throw InputError("Fisher information must be positive");
  }
  return std::isinf(F) ? 0.0 : 1.0 / F;
}

} // namespace

void GaussianClockParams::validate() const {
  if (!(F0 > 0.0)) {
    throw InputError("Gaussian clock: F0 must be positive");
  }
  if (!(D >= 0.0) || !std::isfinite(D)) {
    throw InputError("Gaussian clock: D must be finite and >= 0");
  }
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw InputError("Gaussian clock: T must be positive");
  }
  require_stable(zeta);
}

double GaussianClockParams::sigma2_lo() const { return 2.0 * D * T / 3.0; }

double innovation_variance(const GaussianClockParams& p) {
  p.validate();
  const double z = p.zeta;
  const double dt = p.D * p.T;
  return (1.0 - z) * (1.0 - z) * inverse(p.F0) + z * z * 2.0 * dt +
         (2.0 / 3.0) * dt * (1.0 + z - 2.0 * z * z);
}

GaussianState transition_map(const GaussianClockParams& p, GaussianState s) {
  const double s2 = innovation_variance(p);
  return {p.zeta * s.mean, p.zeta * p.zeta * s.variance + s2};
}

double stationary_variance(const GaussianClockParams& p) {
  p.validate();
  const double z = p.zeta;
  return (1.0 - z) / (1.0 + z) * inverse(p.F0) + p.sigma2_lo() * (1.0 + z + z * z) / (1.0 - z * z);
}

double stationary_clock_diffusion(const GaussianClockParams& p) {
  p.validate();
  const double z = p.zeta;
  return p.T * inverse(p.F0) + 3.0 * p.T * p.sigma2_lo() / ((1.0 - z) * (1.0 - z));
}

double dick_prediction(double sigma2, double zeta, double sigma2_lo, double alpha, double T) {
  require_stable(zeta);
  const double noise = sigma2_lo == 0.0 ? 0.0 : sigma2_lo * (1.0 + alpha + zeta) / (1.0 - zeta);
  return T * (sigma2 * (1.0 + zeta) / (1.0 - zeta) + noise);
}

double variance_bound(double F, double sigma2_lo, double alpha, double beta, double zeta) {
  require_stable(zeta);
  const double noise = sigma2_lo == 0.0
                           ? 0.0
                           : sigma2_lo * (zeta * zeta + alpha * zeta + beta - 1.0 - alpha) /
                                 (1.0 - zeta * zeta);
  return inverse(F) * (1.0 - zeta) / (1.0 + zeta) + noise;
}

double diffusion_bound(double F, double sigma2_lo, double beta, double zeta, double T) {
  require_stable(zeta);
  const double noise = sigma2_lo == 0.0 ? 0.0 : T * sigma2_lo * beta / ((1.0 - zeta) * (1.0 - zeta));
  return T * inverse(F) + noise;
}

void OptimizerInput::validate() const {
  if (!(A > 0.0) || !(D_lo > 0.0) || !(beta > 0.0)) {
    throw InputError("optimizer: A, D_lo and beta must be positive");
  }
  if (!(alpha > -1.0) || !std::isfinite(alpha)) {
    throw InputError("optimizer: alpha must exceed -1");
  }
  require_stable(zeta);
}

double diffusion_objective(const OptimizerInput& in, double T) {
  const double K = in.beta * in.D_lo / ((1.0 - in.zeta) * (1.0 - in.zeta));
  return in.A / T + K * std::pow(T, in.alpha + 1.0);
}

Optimum optimal_interrogation_time(const OptimizerInput& in) {
  in.validate();
  const double K = in.beta * in.D_lo / ((1.0 - in.zeta) * (1.0 - in.zeta));
  const double t = std::pow(in.A / ((in.alpha + 1.0) * K), 1.0 / (in.alpha + 2.0));
  return {t, in.A * (in.alpha + 2.0) / ((in.alpha + 1.0) * t)};
}

Optimum minimize_numerically(const OptimizerInput& in) {
  in.validate();
  using Real = long double;
  const Real A = in.A;
  const Real K = static_cast<Real>(in.beta) * in.D_lo / ((1.0L - in.zeta) * (1.0L - in.zeta));
  const Real p = static_cast<Real>(in.alpha) + 1.0L;
  // Convex in u = log T on the whole line.
  const auto f = [&](Real u) { return A * std::exp(-u) + K * std::exp(p * u); };
  std::uintmax_t iterations = 500;
  const auto [u, value] = boost::math::tools::brent_find_minima(
      f, Real{-60}, Real{60}, std::numeric_limits<Real>::digits / 2, iterations);
  if (iterations >= 500) {
    throw NumericalError("optimizer: Brent minimization did not converge");
  }
  return {static_cast<double>(std::exp(u)), static_cast<double>(value)};
}

double balance_residual(const OptimizerInput& in, double T) {
  const double inv_f = in.A / (T * T);
  const double rhs = (in.alpha + 1.0) * in.D_lo * std::pow(T, in.alpha) * in.beta /
                     ((1.0 - in.zeta) * (1.0 - in.zeta));
  return (inv_f - rhs) / inv_f;
}

double nspin_exponent(double epsilon, double alpha) {
  return -(1.0 + epsilon) * (alpha + 1.0) / (alpha + 2.0);
}

double entanglement_gain_exponent(double epsilon, double alpha) {
  return -epsilon * (alpha + 1.0) / (alpha + 2.0);
}

double nspin_fitted_slope(const OptimizerInput& base, double epsilon, std::span<const double> Ns) {
  std::vector<double> mins;
  mins.reserve(Ns.size());
  for (const double n : Ns) {
    if (!(n >= 1.0)) {
      throw InputError("nspin_fitted_slope: N must be >= 1");
    }
    OptimizerInput in = base;
    in.A = base.A * std::pow(n, -(1.0 + epsilon));
    mins.push_back(minimize_numerically(in).min_diffusion);
  }
  return stats::log_log_slope(Ns, mins);
}

} // namespace aclock::analytic
