#pragma once

#include "aclock/estimation.hpp"
#include "aclock/noise.hpp"
#include "aclock/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

/// The synchronization loop y_{n+1} = K_T y_n - Phi(a_n), a_n ~ p(.|ybar_n),
/// and the statistics of its stationary state.
namespace aclock::clockloop {

/// Outcome a ~ N(ybar, 1/F0 + extra_noise_var). F0 = +infinity with no
/// extra noise returns ybar itself. A positive extra variance models an
/// unsharp position readout whose reference still carries QFI F0.
struct GaussianReference {
  double F0 = 1.0;
  double extra_noise_var = 0.0;
};

/// Two-level reference with outcome 1 ("excited") drawn with probability
/// cos^2((T omega0 ybar + phase_offset)/2), 0 otherwise. The default offset
/// puts the loop on the slope of the fringe so the sign of ybar is visible.
struct RamseyReference {
  double omega0 = 1.0;
  double phase_offset = std::numbers::pi / 2.0;
};

using Reference = std::variant<GaussianReference, RamseyReference>;

/// Quantum Fisher information of the reference for one interrogation of
/// length T (F0, or T^2 omega0^2 for Ramsey).
double reference_qfi(const Reference& ref, double T);
double sample_reference(const Reference& ref, double T, double ybar, Rng& rng);

struct ClockSpec {
  double T = 1.0;
  noise::NoiseModel noise;
  Reference reference = GaussianReference{};
  estimation::Estimator estimator;
  double y0 = 0.0;
  double guard = 1e6;

  /// Throws InputError unless T > 0, the estimator is set, guard > 0 and any
  /// declared zeta satisfies |zeta| < 1.
  void validate() const;
  /// Declared zeta, or 0 if none.
  [[nodiscard]] double zeta() const;
};

/// Gaussian reference N(ybar, 1/F0) with the (1 - zeta)-scaled identity
/// estimator and Brownian noise D.
ClockSpec gaussian_clock(double F0, double D, double zeta, double T = 1.0);

/// Phi(a) = gain (1 - 2a) / (T omega0), linearizing the fringe at offset pi/2.
/// Not zeta-biased: E[Phi | ybar] = gain sin(T omega0 ybar) / (T omega0).
estimation::Estimator ramsey_fringe_estimator(double T, double omega0, double gain);

/// Recorded realization. y[n], ybar[n], end[n], phi_hat[n] for n < size(),
/// and y_final = y[size()].
struct Trajectory {
  std::vector<double> y;
  std::vector<double> ybar;
  std::vector<double> end;
  std::vector<double> phi_hat;
  double y_final = 0.0;
  /// Key and starting counter of the stream that produced it.
  std::uint64_t stream_key = 0;
  std::uint64_t stream_counter = 0;

  [[nodiscard]] std::size_t size() const { return y.size(); }
  /// y[n+1] == y[n] + end[n] - phi_hat[n] bitwise for every n.
  [[nodiscard]] bool replay_consistent() const;
};

/// Runs n_cycles cycles drawing from `rng`. Throws InstabilityError when
/// |y| exceeds the guard or becomes non-finite.
Trajectory run_trajectory(const ClockSpec& spec, std::size_t n_cycles, Rng& rng);

inline constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

struct Estimate {
  double value = kNotApplicable;
  double se = kNotApplicable;
};

struct StatsOptions {
  /// Discarded initial cycles; empty means default_burn_in(zeta).
  std::optional<std::size_t> burn_in;
  std::size_t max_lag = 50;
  /// Block length for the block-variance clock diffusion.
  std::size_t block = 400;
  /// Jackknife segments when a single trajectory is analysed.
  std::size_t segments = 20;
  /// zeta entering the empirical Dick prediction; the fitted zeta if empty.
  std::optional<double> zeta;
};

/// max(1000, ceil(20 / (1 - |zeta|))).
std::size_t default_burn_in(double zeta);

struct StationaryReport {
  double T = 1.0;
  std::size_t n_samples = 0;
  std::size_t n_chunks = 0;
  Estimate mean_y;
  /// gamma(0).
  Estimate sigma2;
  /// gamma(h) for h = 0..max_lag (biased 1/N normalization).
  std::vector<Estimate> gamma;
  /// gamma(h) / gamma(0).
  std::vector<Estimate> rho;
  /// gamma(1) / gamma(0).
  Estimate zeta_hat;
  /// T (gamma_bar(0) + 2 sum_{h<=max_lag} gamma_bar(h)) on the cycle averages.
  Estimate clock_diffusion;
  /// T Var(block sum of ybar) / block.
  Estimate clock_diffusion_block;
  Estimate sigma2_lo_hat;
  Estimate alpha_hat;
  Estimate beta_hat;
  /// T mean(ybar^2).
  Estimate allan;
  /// Dick prediction at the empirical sigma2, sigma2_lo and alpha.
  Estimate dick_empirical;
  /// Regression y_{n+1} = intercept + slope y_n.
  Estimate super_slope;
  Estimate super_intercept;
  /// Regression (ybar - phi_hat)^2 = C + a ybar^2.
  Estimate a_bound_slope;
  Estimate a_bound_intercept;
};

/// Stationary statistics of one trajectory; standard errors by a
/// delete-one-segment jackknife. Throws InputError if burn_in >= size().
StationaryReport stationary_stats(const Trajectory& traj, double T, const StatsOptions& options = {});

/// Runs `n_trajectories` independent trajectories on sub-streams
/// split off `rng` and pools their post-burn-in statistics; standard errors
/// by a delete-one-trajectory jackknife. Independent of `threads`.
StationaryReport run_ensemble(const ClockSpec& spec, std::size_t n_trajectories,
                              std::size_t n_cycles, Rng& rng, const StatsOptions& options = {},
                              unsigned threads = 1);

struct SuperCheck {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  double intercept_se = 0.0;
  double residual = 0.0;
};

SuperCheck supermartingale_check(const Trajectory& traj, std::size_t burn_in);

/// T mean(ybar^2) over the post-burn-in cycles of a trajectory.
Estimate allan_simplified(const Trajectory& traj, double T, std::size_t burn_in);
/// T mean(ybar^2) for a free-running oscillator restarted at y0 each cycle.
Estimate allan_simplified(const noise::NoiseModel& model, double T, double y0,
                          std::size_t n_samples, Rng& rng);

struct BoundCheck {
  double variance_bound = 0.0;
  double diffusion_bound = 0.0;
  Estimate variance_margin;
  Estimate diffusion_margin;

  /// Both margins >= -sigmas * se.
  [[nodiscard]] bool consistent(double sigmas = 3.0) const;
};

/// Margins of the measured stationary variance and clock diffusion over
/// their lower bounds, using the declared zeta of the ClockSpec and the analytic noise
/// moments at spec.T.
BoundCheck bound_check(const StationaryReport& report, const ClockSpec& spec, double qfi_value);

/// (N+1) sigma2 + 2 N sigma2 zeta/(1-zeta) (1 + zeta (zeta^N - 1)/(N (1-zeta))),
/// i.e. sum_{i,j=0..N} zeta^|i-j| sigma2.
double correlated_sum_closed_form(double sigma2, double zeta, std::size_t N);
double correlated_sum_brute_force(double sigma2, double zeta, std::size_t N);

} // namespace aclock::clockloop
