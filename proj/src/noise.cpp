#include "aclock/noise.hpp"

#include "aclock/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aclock::noise {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive_time(double T, const char* what) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    std::ostringstream msg;
    msg << what << ": interrogation time must be positive, got " << T;
    throw InputError(msg.str());
  }
}

} // namespace

NoiseModel::NoiseModel(Kind kind) : kind_(kind) {
  std::visit(Overloaded{
                 [](const Zero&) {},
                 [](const Brownian& b) {
                   if (!(b.D >= 0.0) || !std::isfinite(b.D)) {
                     throw InputError("Brownian noise: D must be finite and >= 0");
                   }
                 },
                 [](const PowerLawAdditive& p) {
                   if (!(p.D >= 0.0) || !std::isfinite(p.D)) {
                     throw InputError("power-law noise: D must be finite and >= 0");
                   }
                   // A martingale has beta >= 1, i.e. alpha >= 0.
                   if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) {
                     throw InputError("power-law noise: alpha must be finite and >= 0");
                   }
                 },
             },
             kind_);
}

double NoiseModel::variance_at(double t) const {
  if (t <= 0.0) {
    return 0.0;
  }
  return std::visit(Overloaded{
                        [](const Zero&) { return 0.0; },
                        [t](const Brownian& b) { return 2.0 * b.D * t; },
                        [t](const PowerLawAdditive& p) {
                          return p.D * (p.alpha + 1.0) * (p.alpha + 2.0) / 2.0 *
                                 std::pow(t, p.alpha);
                        },
                    },
                    kind_);
}

bool NoiseModel::is_silent() const {
  return std::visit(Overloaded{
                        [](const Zero&) { return true; },
                        [](const Brownian& b) { return b.D == 0.0; },
                        [](const PowerLawAdditive& p) { return p.D == 0.0; },
                    },
                    kind_);
}

std::string NoiseModel::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const Zero&) { out << "zero"; },
                 [&](const Brownian& b) { out << "brownian(D=" << b.D << ")"; },
                 [&](const PowerLawAdditive& p) {
                   out << "power-law(D=" << p.D << ",alpha=" << p.alpha << ")";
                 },
             },
             kind_);
  return out.str();
}

CycleCovariance cycle_covariance(const NoiseModel& model, double T) {
  require_positive_time(T, "cycle_covariance");
  return std::visit(
      Overloaded{
          [](const Zero&) { return CycleCovariance{}; },
          // Var B_T = 2DT; Var(1/T int B) = 2DT/3; Cov = (1/T) int_0^T 2Ds ds = DT.
          [T](const Brownian& b) {
            return CycleCovariance{2.0 * b.D * T, 2.0 * b.D * T / 3.0, b.D * T};
          },
          // With f^2 = c^2 s^(alpha-1) and c^2 = D alpha (alpha+1)(alpha+2)/2:
          //   Var M_T        = c^2 T^alpha / alpha
          //   Var (ybar - y) = T^-2 int f^2 (T-s)^2 = D T^alpha
          //   Cov            = T^-1 int f^2 (T-s)   = c^2 T^alpha / (alpha (alpha+1))
          [T](const PowerLawAdditive& p) {
            const double s2 = p.D * std::pow(T, p.alpha);
            return CycleCovariance{s2 * (p.alpha + 1.0) * (p.alpha + 2.0) / 2.0, s2,
                                   s2 * (p.alpha + 2.0) / 2.0};
          },
      },
      model.kind());
}

CycleSampler::CycleSampler(const NoiseModel& model, double T) : cov_(cycle_covariance(model, T)) {
  if (cov_.var_end > 0.0) {
    l11_ = std::sqrt(cov_.var_end);
    l21_ = cov_.cov / l11_;
    l22_ = std::sqrt(std::max(0.0, cov_.var_avg - l21_ * l21_));
  } else {
    l22_ = std::sqrt(std::max(0.0, cov_.var_avg));
  }
}

CycleIncrement CycleSampler::draw(Rng& rng) const {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  return {l11_ * z1, l21_ * z1 + l22_ * z2};
}

CycleIncrement sample_cycle(const NoiseModel& model, double T, Rng& rng) {
  return CycleSampler(model, T).draw(rng);
}

NoiseMoments moments(const NoiseModel& model, double T) {
  const CycleCovariance c = cycle_covariance(model, T);
  NoiseMoments m;
  m.sigma2_lo = c.var_avg;
  if (c.var_avg <= 0.0) {
    return m;
  }
  // For a martingale, (1/T) int_0^T E[M_s^2] ds = E[M_T (ybar - y)] = cov,
  // so the alpha equation reads cov = sigma2_lo (alpha + 2) / 2.
  m.alpha = 2.0 * c.cov / c.var_avg - 2.0;
  m.beta = c.var_end / c.var_avg;
  return m;
}

std::vector<double> sample_path(const NoiseModel& model, double y0, double T, int n_steps,
                                Rng& rng) {
  require_positive_time(T, "sample_path");
  if (n_steps < 1) {
    throw InputError("sample_path: n_steps must be >= 1");
  }
  std::vector<double> path;
  path.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.push_back(y0);
  double y = y0;
  double prev_var = 0.0;
  for (int k = 1; k <= n_steps; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(n_steps);
    const double var = model.variance_at(t);
    y += std::sqrt(std::max(0.0, var - prev_var)) * rng.normal();
    prev_var = var;
    path.push_back(y);
  }
  return path;
}

} // namespace aclock::noise
