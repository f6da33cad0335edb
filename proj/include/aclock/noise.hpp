#pragma once

#include "aclock/rng.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

/// Local-oscillator noise: martingale processes K_t acting on the relative
/// frequency error, K_t y = y + M_t with M_0 = 0.
///
/// Normalization: Brownian noise with diffusion coefficient D has
/// Var(M_t) = 2 D t (not D t). Every derived constant follows from this:
/// the simplified Allan variance of one cycle is 2 D T / 3, and the noise
/// constants are alpha = 1, beta = 3.
namespace aclock::noise {

struct Zero {};

struct Brownian {
  double D = 0.0;
};

/// M_t = int_0^t f(s) dW_s with f(s)^2 proportional to s^(alpha - 1),
/// normalized so that the simplified Allan variance is D T^alpha.
/// alpha = 0 is the limit in which the whole variance D is injected at
/// t = 0+.
struct PowerLawAdditive {
  double D = 0.0;
  double alpha = 1.0;
};

class NoiseModel {
public:
  using Kind = std::variant<Zero, Brownian, PowerLawAdditive>;

  NoiseModel() = default;
  /// Throws InputError on D < 0 or alpha < 0.
  explicit NoiseModel(Kind kind);

  static NoiseModel zero() { return NoiseModel(Zero{}); }
  static NoiseModel brownian(double D) { return NoiseModel(Brownian{D}); }
  static NoiseModel power_law(double D, double alpha) {
    return NoiseModel(PowerLawAdditive{D, alpha});
  }

  [[nodiscard]] const Kind& kind() const { return kind_; }
  /// E[(K_t y - y)^2].
  [[nodiscard]] double variance_at(double t) const;
  [[nodiscard]] bool is_silent() const;
  [[nodiscard]] std::string describe() const;

private:
  Kind kind_ = Zero{};
};

/// One cycle of length T: (K_T y - y, ybar - y) where ybar is the time
/// average of K_s y over [0, T].
struct CycleIncrement {
  double end_minus_start = 0.0;
  double avg_minus_start = 0.0;
};

/// Joint covariance of a CycleIncrement.
struct CycleCovariance {
  double var_end = 0.0;
  double var_avg = 0.0;
  double cov = 0.0;
};

/// sigma2_lo = E[(ybar - y)^2]; alpha and beta are empty when sigma2_lo = 0.
struct NoiseMoments {
  double sigma2_lo = 0.0;
  std::optional<double> alpha;
  std::optional<double> beta;
};

CycleCovariance cycle_covariance(const NoiseModel& model, double T);

/// Cholesky factor of the cycle covariance, computed once per (model, T).
class CycleSampler {
public:
  CycleSampler(const NoiseModel& model, double T);

  /// Always consumes two normals from `rng` so that silent models stay
  /// stream-aligned with noisy ones.
  CycleIncrement draw(Rng& rng) const;
  [[nodiscard]] const CycleCovariance& covariance() const { return cov_; }

private:
  CycleCovariance cov_;
  double l11_ = 0.0;
  double l21_ = 0.0;
  double l22_ = 0.0;
};

/// Exact joint Gaussian draw of one cycle's increments; see CycleSampler.
CycleIncrement sample_cycle(const NoiseModel& model, double T, Rng& rng);

NoiseMoments moments(const NoiseModel& model, double T);

/// Diagnostic path K_{kT/n} y0 for k = 0..n_steps (n_steps + 1 values),
/// sampled from exact independent increments.
std::vector<double> sample_path(const NoiseModel& model, double y0, double T, int n_steps,
                                Rng& rng);

} // namespace aclock::noise
