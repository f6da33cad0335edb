#include "aclock/clockloop.hpp"

#include "aclock/analytic.hpp"
#include "aclock/errors.hpp"
#include "aclock/parallel.hpp"
#include "aclock/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aclock::clockloop {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// Lagged products of one series, with the head/tail sums needed to
/// mean-correct a pooled autocovariance.
struct LagSums {
  std::vector<double> prod;
  std::vector<double> head;
  std::vector<double> tail;
  std::vector<double> pairs;

  explicit LagSums(std::size_t max_lag = 0)
      : prod(max_lag + 1), head(max_lag + 1), tail(max_lag + 1), pairs(max_lag + 1) {}

  void add(std::span<const double> x, std::size_t n) {
    const double xn = x[n];
    const std::size_t top = std::min(prod.size() - 1, x.size() - 1 - n);
    for (std::size_t h = 0; h <= top; ++h) {
      prod[h] += xn * x[n + h];
      head[h] += xn;
      tail[h] += x[n + h];
      pairs[h] += 1.0;
    }
  }

  template <typename Op>
  void combine(const LagSums& o, Op op) {
    for (std::size_t h = 0; h < prod.size(); ++h) {
      prod[h] = op(prod[h], o.prod[h]);
      head[h] = op(head[h], o.head[h]);
      tail[h] = op(tail[h], o.tail[h]);
      pairs[h] = op(pairs[h], o.pairs[h]);
    }
  }

  [[nodiscard]] double gamma(std::size_t h, double mean, double n) const {
    return (prod[h] - mean * (head[h] + tail[h]) + pairs[h] * mean * mean) / n;
  }
};

/// Sums of x, y, x^2, xy, y^2 for a least-squares line.
struct RegressionSums {
  double n = 0.0, x = 0.0, y = 0.0, xx = 0.0, xy = 0.0, yy = 0.0;

  void add(double xi, double yi) {
    n += 1.0;
    x += xi;
    y += yi;
    xx += xi * xi;
    xy += xi * yi;
    yy += yi * yi;
  }

  template <typename Op>
  void combine(const RegressionSums& o, Op op) {
    n = op(n, o.n);
    x = op(x, o.x);
    y = op(y, o.y);
    xx = op(xx, o.xx);
    xy = op(xy, o.xy);
    yy = op(yy, o.yy);
  }

  [[nodiscard]] std::pair<double, double> fit() const {
    const double det = n * xx - x * x;
    if (!(det > 0.0)) {
      return {kNotApplicable, kNotApplicable};
    }
    const double slope = (n * xy - x * y) / det;
    return {slope, (y - slope * x) / n};
  }
};

struct Sums {
  double n = 0.0;
  double sum_y = 0.0;
  LagSums y;
  LagSums ybar;
  double blocks = 0.0;
  double block_sum = 0.0;
  double block_sq = 0.0;
  double aa = 0.0;
  double ee = 0.0;
  double ea = 0.0;
  RegressionSums super;
  RegressionSums a_bound;

  explicit Sums(std::size_t max_lag = 0) : y(max_lag), ybar(max_lag) {}

  template <typename Op>
  void combine(const Sums& o, Op op) {
    n = op(n, o.n);
    sum_y = op(sum_y, o.sum_y);
    y.combine(o.y, op);
    ybar.combine(o.ybar, op);
    blocks = op(blocks, o.blocks);
    block_sum = op(block_sum, o.block_sum);
    block_sq = op(block_sq, o.block_sq);
    aa = op(aa, o.aa);
    ee = op(ee, o.ee);
    ea = op(ea, o.ea);
    super.combine(o.super, op);
    a_bound.combine(o.a_bound, op);
  }

  Sums& operator+=(const Sums& o) {
    combine(o, [](double a, double b) { return a + b; });
    return *this;
  }
  Sums& operator-=(const Sums& o) {
    combine(o, [](double a, double b) { return a - b; });
    return *this;
  }
};

/// Adds cycles n in [begin, end) of the post-burn-in window [burn, size).
/// Lags and blocks reach past `end`, so disjoint ranges add up to the
/// statistics of the whole window.
void accumulate(Sums& s, const Trajectory& traj, std::size_t burn, std::size_t begin,
                std::size_t end, std::size_t block) {
  const std::span<const double> y(traj.y.data() + burn, traj.size() - burn);
  const std::span<const double> ybar(traj.ybar.data() + burn, traj.size() - burn);
  for (std::size_t k = begin - burn; k < end - burn; ++k) {
    const std::size_t n = k + burn;
    s.n += 1.0;
    s.sum_y += y[k];
    s.y.add(y, k);
    s.ybar.add(ybar, k);
    const double a = traj.ybar[n] - traj.y[n];
    const double e = traj.end[n];
    s.aa += a * a;
    s.ee += e * e;
    s.ea += e * a;
    const double next = n + 1 < traj.size() ? traj.y[n + 1] : traj.y_final;
    s.super.add(traj.y[n], next);
    const double err = traj.ybar[n] - traj.phi_hat[n];
    s.a_bound.add(traj.ybar[n] * traj.ybar[n], err * err);
    if (k % block == 0 && k + block <= ybar.size()) {
      double b = 0.0;
      for (std::size_t j = k; j < k + block; ++j) {
        b += ybar[j];
      }
      s.blocks += 1.0;
      s.block_sum += b;
      s.block_sq += b * b;
    }
  }
}

enum Field : std::size_t {
  kMeanY,
  kZetaHat,
  kDiffusion,
  kDiffusionBlock,
  kSigma2Lo,
  kAlpha,
  kBeta,
  kAllan,
  kDick,
  kSuperSlope,
  kSuperIntercept,
  kABoundSlope,
  kABoundIntercept,
  kFieldCount
};

std::vector<double> statistic(const Sums& s, double T, std::size_t max_lag, std::size_t block,
                              std::optional<double> zeta) {
  std::vector<double> out(kFieldCount + 2 * (max_lag + 1), kNotApplicable);
  const double my = s.sum_y / s.n;
  const double mb = s.ybar.head[0] / s.n;
  const double g0 = s.y.gamma(0, my, s.n);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    const double g = s.y.gamma(h, my, s.n);
    out[kFieldCount + h] = g;
    out[kFieldCount + max_lag + 1 + h] = g / g0;
  }
  out[kMeanY] = my;
  if (max_lag >= 1) {
    out[kZetaHat] = s.y.gamma(1, my, s.n) / g0;
  }
  double d = s.ybar.gamma(0, mb, s.n);
  for (std::size_t h = 1; h <= max_lag; ++h) {
    d += 2.0 * s.ybar.gamma(h, mb, s.n);
  }
  out[kDiffusion] = T * d;
  if (s.blocks >= 2.0) {
    const double bm = s.block_sum / s.blocks;
    out[kDiffusionBlock] = T * (s.block_sq / s.blocks - bm * bm) / static_cast<double>(block);
  }
  const double s2lo = s.aa / s.n;
  out[kSigma2Lo] = s2lo;
  if (s.aa > 0.0) {
    out[kAlpha] = 2.0 * s.ea / s.aa - 2.0;
    out[kBeta] = s.ee / s.aa;
  }
  out[kAllan] = T * s.ybar.prod[0] / s.n;
  const double z = zeta.value_or(out[kZetaHat]);
  if (std::abs(z) < 1.0) {
    out[kDick] = analytic::dick_prediction(g0, z, s.aa > 0.0 ? s2lo : 0.0,
                                           s.aa > 0.0 ? out[kAlpha] : 0.0, T);
  }
  std::tie(out[kSuperSlope], out[kSuperIntercept]) = s.super.fit();
  std::tie(out[kABoundSlope], out[kABoundIntercept]) = s.a_bound.fit();
  return out;
}

StationaryReport make_report(std::span<const Sums> chunks, double T, std::size_t max_lag,
                             std::size_t block, std::optional<double> zeta) {
  const auto jk = stats::jackknife<Sums>(
      chunks, [&](const Sums& s) { return statistic(s, T, max_lag, block, zeta); });
  const auto at = [&](std::size_t i) { return Estimate{jk.estimate[i], jk.se[i]}; };
  StationaryReport r;
  r.T = T;
  r.n_chunks = chunks.size();
  r.n_samples = static_cast<std::size_t>(stats::pairwise_sum<Sums>(chunks).n);
  r.mean_y = at(kMeanY);
  r.zeta_hat = at(kZetaHat);
  r.clock_diffusion = at(kDiffusion);
  r.clock_diffusion_block = at(kDiffusionBlock);
  r.sigma2_lo_hat = at(kSigma2Lo);
  r.alpha_hat = at(kAlpha);
  r.beta_hat = at(kBeta);
  r.allan = at(kAllan);
  r.dick_empirical = at(kDick);
  r.super_slope = at(kSuperSlope);
  r.super_intercept = at(kSuperIntercept);
  r.a_bound_slope = at(kABoundSlope);
  r.a_bound_intercept = at(kABoundIntercept);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    r.gamma.push_back(at(kFieldCount + h));
    r.rho.push_back(at(kFieldCount + max_lag + 1 + h));
  }
  r.sigma2 = r.gamma.front();
  return r;
}

void check_options(const StatsOptions& o) {
  if (o.block == 0) {
    throw InputError("block length must be positive");
  }
}

} // namespace

double reference_qfi(const Reference& ref, double T) {
  return std::visit(Overloaded{
                        [](const GaussianReference& g) { return g.F0; },
                        [T](const RamseyReference& r) { return T * T * r.omega0 * r.omega0; },
                    },
                    ref);
}

double sample_reference(const Reference& ref, double T, double ybar, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const GaussianReference& g) {
                          const double z = rng.normal();
                          const double var =
                              (std::isinf(g.F0) ? 0.0 : 1.0 / g.F0) + g.extra_noise_var;
                          return ybar + std::sqrt(var) * z;
                        },
                        [&](const RamseyReference& r) {
                          const double c = std::cos((T * r.omega0 * ybar + r.phase_offset) / 2.0);
                          return rng.uniform() < c * c ? 1.0 : 0.0;
                        },
                    },
                    ref);
}

void ClockSpec::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw InputError("clock: T must be positive");
  }
  if (!estimator.map) {
    throw InputError("clock: estimator is not set");
  }
  if (!(guard > 0.0)) {
    throw InputError("clock: guard must be positive");
  }
  if (estimator.declared_zeta && !(std::abs(*estimator.declared_zeta) < 1.0)) {
    std::ostringstream msg;
    msg << "clock: declared zeta " << *estimator.declared_zeta
        << " violates the stability condition |zeta| < 1";
    throw InputError(msg.str());
  }
  std::visit(Overloaded{
                 [](const GaussianReference& g) {
                   if (!(g.F0 > 0.0) || !(g.extra_noise_var >= 0.0)) {
                     throw InputError("clock: Gaussian reference needs F0 > 0 and extra noise >= 0");
                   }
                 },
                 [](const RamseyReference& r) {
                   if (!(r.omega0 > 0.0)) {
                     throw InputError("clock: Ramsey reference needs omega0 > 0");
                   }
                 },
             },
             reference);
}

double ClockSpec::zeta() const { return estimator.declared_zeta.value_or(0.0); }

ClockSpec gaussian_clock(double F0, double D, double zeta, double T) {
  ClockSpec spec;
  spec.T = T;
  spec.noise = noise::NoiseModel::brownian(D);
  spec.reference = GaussianReference{F0, 0.0};
  spec.estimator = estimation::scaled_identity(zeta);
  spec.validate();
  return spec;
}

estimation::Estimator ramsey_fringe_estimator(double T, double omega0, double gain) {
  if (!(T > 0.0) || !(omega0 > 0.0)) {
    throw InputError("ramsey_fringe_estimator: T and omega0 must be positive");
  }
  const double scale = gain / (T * omega0);
  return {[scale](double a) { return scale * (1.0 - 2.0 * a); }, std::nullopt};
}

bool Trajectory::replay_consistent() const {
  for (std::size_t n = 0; n < size(); ++n) {
    const double next = n + 1 < size() ? y[n + 1] : y_final;
    if (y[n] + end[n] - phi_hat[n] != next) {
      return false;
    }
  }
  return true;
}

Trajectory run_trajectory(const ClockSpec& spec, std::size_t n_cycles, Rng& rng) {
  spec.validate();
  const noise::CycleSampler sampler(spec.noise, spec.T);
  Trajectory t;
  t.stream_key = rng.key();
  t.stream_counter = rng.counter();
  t.y.reserve(n_cycles);
  t.ybar.reserve(n_cycles);
  t.end.reserve(n_cycles);
  t.phi_hat.reserve(n_cycles);
  double y = spec.y0;
  if (std::abs(y) > spec.guard) {
    std::ostringstream msg;
    msg << "initial |y0| = " << std::abs(y) << " exceeds guard " << spec.guard;
    throw InstabilityError(msg.str());
  }
  for (std::size_t n = 0; n < n_cycles; ++n) {
    const noise::CycleIncrement inc = sampler.draw(rng);
    const double ybar = y + inc.avg_minus_start;
    const double outcome = sample_reference(spec.reference, spec.T, ybar, rng);
    const double phi_hat = spec.estimator.map(outcome);
    t.y.push_back(y);
    t.ybar.push_back(ybar);
    t.end.push_back(inc.end_minus_start);
    t.phi_hat.push_back(phi_hat);
    y = y + inc.end_minus_start - phi_hat;
    if (!std::isfinite(y) || std::abs(y) > spec.guard) {
      std::ostringstream msg;
      msg << "clock diverged at cycle " << n << ": |y| = " << std::abs(y) << " exceeds guard "
          << spec.guard;
      throw InstabilityError(msg.str());
    }
  }
  t.y_final = y;
  return t;
}

std::size_t default_burn_in(double zeta) {
  const double m = std::ceil(20.0 / (1.0 - std::min(std::abs(zeta), 0.999999)));
  return std::max<std::size_t>(1000, static_cast<std::size_t>(m));
}

StationaryReport stationary_stats(const Trajectory& traj, double T, const StatsOptions& options) {
  check_options(options);
  const std::size_t burn = options.burn_in.value_or(default_burn_in(options.zeta.value_or(0.0)));
  if (burn >= traj.size()) {
    std::ostringstream msg;
    msg << "burn-in " << burn << " leaves no cycles of " << traj.size();
    throw InputError(msg.str());
  }
  const std::size_t len = traj.size() - burn;
  const std::size_t segments = std::clamp<std::size_t>(options.segments, 1, std::max<std::size_t>(1, len / 2));
  std::vector<Sums> chunks;
  chunks.reserve(segments);
  for (std::size_t s = 0; s < segments; ++s) {
    Sums sums(options.max_lag);
    accumulate(sums, traj, burn, burn + len * s / segments, burn + len * (s + 1) / segments,
               options.block);
    chunks.push_back(std::move(sums));
  }
  return make_report(chunks, T, options.max_lag, options.block, options.zeta);
}

StationaryReport run_ensemble(const ClockSpec& spec, std::size_t n_trajectories,
                              std::size_t n_cycles, Rng& rng, const StatsOptions& options,
                              unsigned threads) {
  spec.validate();
  check_options(options);
  if (n_trajectories == 0) {
    throw InputError("run_ensemble: need at least one trajectory");
  }
  const std::size_t burn = options.burn_in.value_or(default_burn_in(spec.zeta()));
  if (burn >= n_cycles) {
    std::ostringstream msg;
    msg << "burn-in " << burn << " leaves no cycles of " << n_cycles;
    throw InputError(msg.str());
  }
  StatsOptions opts = options;
  opts.burn_in = burn;
  const Rng base = rng.split(rng());
  if (n_trajectories == 1) {
    Rng r = base.split(0);
    return stationary_stats(run_trajectory(spec, n_cycles, r), spec.T, opts);
  }
  std::vector<Sums> chunks(n_trajectories, Sums(opts.max_lag));
  parallel_for(n_trajectories, threads, [&](std::size_t i) {
    Rng r = base.split(i);
    const Trajectory t = run_trajectory(spec, n_cycles, r);
    accumulate(chunks[i], t, burn, burn, n_cycles, opts.block);
  });
  return make_report(chunks, spec.T, opts.max_lag, opts.block, opts.zeta);
}

SuperCheck supermartingale_check(const Trajectory& traj, std::size_t burn_in) {
  if (burn_in >= traj.size()) {
    throw InputError("supermartingale_check: burn-in leaves no cycles");
  }
  std::vector<double> x(traj.y.begin() + static_cast<std::ptrdiff_t>(burn_in), traj.y.end());
  std::vector<double> next(x.begin() + 1, x.end());
  next.push_back(traj.y_final);
  const stats::LinearFit fit = stats::fit_line(x, next);
  const double n = static_cast<double>(x.size());
  double sx = 0.0;
  double sxx = 0.0;
  for (const double v : x) {
    sx += v;
    sxx += v * v;
  }
  // Var(intercept) = s^2 sum x^2 / (n Sxx).
  const double centred = sxx - sx * sx / n;
  return {fit.slope, fit.slope_se, fit.intercept,
          std::sqrt(fit.residual_variance * sxx / (n * centred)), std::sqrt(fit.residual_variance)};
}

Estimate allan_simplified(const Trajectory& traj, double T, std::size_t burn_in) {
  StatsOptions o;
  o.burn_in = burn_in;
  o.max_lag = 0;
  return stationary_stats(traj, T, o).allan;
}

Estimate allan_simplified(const noise::NoiseModel& model, double T, double y0,
                          std::size_t n_samples, Rng& rng) {
  if (n_samples < 2) {
    throw InputError("allan_simplified: need at least two samples");
  }
  const noise::CycleSampler sampler(model, T);
  std::vector<double> v;
  v.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double ybar = y0 + sampler.draw(rng).avg_minus_start;
    v.push_back(T * ybar * ybar);
  }
  const auto m = stats::mean_with_se(v);
  return {m.mean, m.se};
}

bool BoundCheck::consistent(double sigmas) const {
  return variance_margin.value >= -sigmas * variance_margin.se &&
         diffusion_margin.value >= -sigmas * diffusion_margin.se;
}

BoundCheck bound_check(const StationaryReport& report, const ClockSpec& spec, double qfi_value) {
  const double zeta = spec.zeta();
  const noise::NoiseMoments m = noise::moments(spec.noise, spec.T);
  const double alpha = m.alpha.value_or(0.0);
  const double beta = m.beta.value_or(1.0);
  BoundCheck b;
  b.variance_bound = analytic::variance_bound(qfi_value, m.sigma2_lo, alpha, beta, zeta);
  b.diffusion_bound = analytic::diffusion_bound(qfi_value, m.sigma2_lo, beta, zeta, spec.T);
  b.variance_margin = {report.sigma2.value - b.variance_bound, report.sigma2.se};
  b.diffusion_margin = {report.clock_diffusion.value - b.diffusion_bound, report.clock_diffusion.se};
  return b;
}

double correlated_sum_closed_form(double sigma2, double zeta, std::size_t N) {
  if (zeta == 1.0) {
    throw InputError("correlated_sum_closed_form: zeta = 1 is excluded");
  }
  const double n = static_cast<double>(N);
  const double r = zeta / (1.0 - zeta);
  return (n + 1.0) * sigma2 +
         2.0 * sigma2 * r * (n + zeta * (std::pow(zeta, n) - 1.0) / (1.0 - zeta));
}

double correlated_sum_brute_force(double sigma2, double zeta, std::size_t N) {
  stats::CompensatedSum s;
  for (std::size_t i = 0; i <= N; ++i) {
    for (std::size_t j = 0; j <= N; ++j) {
      s.add(std::pow(zeta, static_cast<double>(i > j ? i - j : j - i)));
    }
  }
  return sigma2 * s.value();
}

} // namespace aclock::clockloop
