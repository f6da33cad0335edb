#include "aclock/estimation.hpp"

#include "aclock/errors.hpp"
#include "aclock/numerics.hpp"
#include "aclock/parallel.hpp"
#include "aclock/stats.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace aclock::estimation {

namespace {

constexpr std::size_t kBayesNodes = 2048;
constexpr double kBayesHalfWidth = 8.0;   // prior standard deviations
constexpr double kPriorTruncation = 10.0; // prior standard deviations
constexpr double kRichardsonTolerance = 1e-6;
constexpr std::size_t kCostChunks = 64;

double normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

/// Integral of f over the family's outcome space at parameter phi.
double integrate_outcomes(const OutcomeFamily& family, double phi,
                          const numerics::ScalarFn& f, std::string_view what) {
  if (family.support.is_line()) {
    const auto [centre, width] =
        family.locate ? family.locate(phi) : std::pair<double, double>{phi, 1.0};
    return numerics::integrate_line(f, centre, width, numerics::kQuadratureTolerance, what);
  }
  if (!std::isfinite(family.support.lo) || !std::isfinite(family.support.hi)) {
    throw InputError("outcome family: support must be the whole line or a finite interval");
  }
  return numerics::integrate(f, family.support.lo, family.support.hi,
                             numerics::kQuadratureTolerance, what);
}

double fisher_with_step(const OutcomeFamily& family, double phi, double h) {
  const auto integrand = [&](double a) {
    const double p = family.density(a, phi);
    if (!(p > 0.0)) {
      return 0.0;
    }
    const double dp = (family.density(a, phi + h) - family.density(a, phi - h)) / (2.0 * h);
    return dp * dp / p;
  };
  return integrate_outcomes(family, phi, integrand, "Fisher information");
}

/// int_x^inf (s - mu) q(s) ds for a Gaussian prior, evaluated from whichever
/// tail keeps the integrand small.
double gaussian_tail_moment(const Prior::Gaussian& g, double x) {
  const double sd = std::sqrt(g.variance);
  const auto f = [&](double s) { return (s - g.mean) * normal_pdf(s, g.mean, g.variance); };
  const double lo = g.mean - kPriorTruncation * sd;
  const double hi = g.mean + kPriorTruncation * sd;
  if (x >= g.mean) {
    return x >= hi ? 0.0 : numerics::integrate(f, x, hi, 1e-14, "tilde-q tail");
  }
  return x <= lo ? 0.0 : -numerics::integrate(f, lo, x, 1e-14, "tilde-q tail");
}

void require_zero_mean(const Prior& prior, const char* what) {
  if (std::abs(prior.mean()) > 1e-12 * std::max(1.0, std::sqrt(prior.variance()))) {
    std::ostringstream msg;
    msg << what << ": prior must have zero mean, got " << prior.mean();
    throw InputError(msg.str());
  }
}

} // namespace

bool Interval::is_line() const { return std::isinf(lo) && lo < 0 && std::isinf(hi) && hi > 0; }

OutcomeFamily gaussian_family(double variance) {
  return gaussian_location_family([](double phi) { return phi; }, variance);
}

OutcomeFamily gaussian_location_family(std::function<double(double)> mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InputError("gaussian family: variance must be positive and finite");
  }
  const double sd = std::sqrt(variance);
  OutcomeFamily f;
  f.density = [mean, variance](double a, double phi) { return normal_pdf(a, mean(phi), variance); };
  f.sample = [mean, sd](double phi, Rng& rng) { return mean(phi) + sd * rng.normal(); };
  f.locate = [mean, sd](double phi) { return std::pair<double, double>{mean(phi), sd}; };
  return f;
}

Estimator scaled_identity(double zeta) {
  const double gain = 1.0 - zeta;
  return Estimator{[gain](double a) { return gain * a; }, zeta};
}

double GridDensity::spacing() const {
  if (nodes.size() < 2) {
    throw InputError("grid density: need at least two nodes");
  }
  return (nodes.back() - nodes.front()) / static_cast<double>(nodes.size() - 1);
}

void GridDensity::validate(bool normalized) const {
  if (nodes.size() != weights.size()) {
    throw InputError("grid density: nodes and weights differ in length");
  }
  const double dx = spacing();
  if (!(dx > 0.0)) {
    throw InputError("grid density: nodes must be increasing");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (std::abs(nodes[i] - nodes[i - 1] - dx) > 1e-9 * dx) {
      throw InputError("grid density: nodes must be equally spaced");
    }
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw InputError("grid density: weights must be non-negative");
    }
    total += w;
  }
  if (normalized && std::abs(total - 1.0) > 1e-9) {
    throw InputError("grid density: weights must sum to one");
  }
}

Prior::Prior(std::variant<Gaussian, GridDensity> kind) : kind_(std::move(kind)) {
  if (const auto* g = std::get_if<Gaussian>(&kind_)) {
    if (!(g->variance > 0.0) || !std::isfinite(g->variance) || !std::isfinite(g->mean)) {
      throw InputError("Gaussian prior: variance must be positive and finite");
    }
    mean_ = g->mean;
    variance_ = g->variance;
    return;
  }
  const auto& grid = std::get<GridDensity>(kind_);
  grid.validate(true);
  double m = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    m += grid.weights[i] * grid.nodes[i];
  }
  double v = 0.0;
  double c = 0.0;
  cdf_.reserve(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    v += grid.weights[i] * (grid.nodes[i] - m) * (grid.nodes[i] - m);
    c += grid.weights[i];
    cdf_.push_back(c);
  }
  if (!(v > 0.0)) {
    throw InputError("grid prior: variance must be positive");
  }
  mean_ = m;
  variance_ = v;
}

Prior Prior::gaussian(double mean, double variance) { return Prior(Gaussian{mean, variance}); }

Prior Prior::grid(GridDensity density) { return Prior(std::move(density)); }

Prior Prior::uniform(double lo, double hi, std::size_t n) {
  if (!(hi > lo) || n < 2) {
    throw InputError("uniform prior: need lo < hi and at least two nodes");
  }
  GridDensity g;
  const double dx = (hi - lo) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes.push_back(lo + (static_cast<double>(i) + 0.5) * dx);
    g.weights.push_back(1.0 / static_cast<double>(n));
  }
  return Prior(std::move(g));
}

double Prior::density(double phi) const {
  if (const auto* g = std::get_if<Gaussian>(&kind_)) {
    return normal_pdf(phi, g->mean, g->variance);
  }
  const auto& grid = std::get<GridDensity>(kind_);
  const double dx = grid.spacing();
  const double pos = (phi - grid.nodes.front()) / dx;
  const long i = std::lround(pos);
  if (i < 0 || i >= static_cast<long>(grid.nodes.size()) || std::abs(pos - i) > 0.5) {
    return 0.0;
  }
  return grid.density_at(static_cast<std::size_t>(i));
}

double Prior::expect(const std::function<double(double)>& g) const {
  if (const auto* gauss = std::get_if<Gaussian>(&kind_)) {
    const double sd = std::sqrt(gauss->variance);
    const auto f = [&](double phi) { return g(phi) * normal_pdf(phi, gauss->mean, gauss->variance); };
    return numerics::integrate(f, gauss->mean - kPriorTruncation * sd,
                               gauss->mean + kPriorTruncation * sd,
                               numerics::kQuadratureTolerance, "prior expectation");
  }
  const auto& grid = std::get<GridDensity>(kind_);
  stats::CompensatedSum s;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    if (grid.weights[i] > 0.0) {
      s.add(grid.weights[i] * g(grid.nodes[i]));
    }
  }
  return s.value();
}

double Prior::sample(Rng& rng) const {
  if (const auto* g = std::get_if<Gaussian>(&kind_)) {
    return g->mean + std::sqrt(g->variance) * rng.normal();
  }
  const auto& grid = std::get<GridDensity>(kind_);
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()),
                                       grid.nodes.size() - 1);
  return grid.nodes[i];
}

GridDensity Prior::discretize() const {
  if (const auto* g = std::get_if<Gaussian>(&kind_)) {
    const double sd = std::sqrt(g->variance);
    const double lo = g->mean - kBayesHalfWidth * sd;
    const double dx = 2.0 * kBayesHalfWidth * sd / static_cast<double>(kBayesNodes - 1);
    GridDensity out;
    out.nodes.reserve(kBayesNodes);
    out.weights.reserve(kBayesNodes);
    for (std::size_t i = 0; i < kBayesNodes; ++i) {
      const double x = lo + dx * static_cast<double>(i);
      out.nodes.push_back(x);
      out.weights.push_back(normal_pdf(x, g->mean, g->variance) * dx);
    }
    return out;
  }
  return std::get<GridDensity>(kind_);
}

double fisher_information(const OutcomeFamily& family, double phi) {
  const double h = std::max(1e-5, 1e-5 * std::abs(phi));
  const double f1 = fisher_with_step(family, phi, h);
  const double f2 = fisher_with_step(family, phi, 2.0 * h);
  if (std::abs(f1 - f2) > kRichardsonTolerance * std::abs(f1) + 1e-9) {
    std::ostringstream msg;
    msg << "Fisher information at phi=" << phi << ": central differences disagree (h=" << h
        << ": " << f1 << ", 2h: " << f2 << ")";
    throw NumericalError(msg.str());
  }
  return f1;
}

FisherFn fisher_function(const OutcomeFamily& family) {
  return [family](double phi) { return fisher_information(family, phi); };
}

Estimator optimal_estimator(const OutcomeFamily& family, const Prior& prior) {
  auto grid = std::make_shared<const GridDensity>(prior.discretize());
  Estimator est;
  est.map = [family, grid](double a) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < grid->nodes.size(); ++i) {
      const double w = grid->weights[i] * family.density(a, grid->nodes[i]);
      num += w * grid->nodes[i];
      den += w;
    }
    if (!(den > 0.0) || !std::isfinite(num)) {
      std::ostringstream msg;
      msg << "optimal estimator: posterior mass underflows at outcome " << a
          << " (outside the prior grid's reach)";
      throw NumericalError(msg.str());
    }
    return num / den;
  };
  return est;
}

BiasFit check_bias(const OutcomeFamily& family, const Estimator& estimator,
                   std::span<const double> phis, Rng& rng, std::size_t samples_per_node) {
  if (phis.size() < 2 || samples_per_node == 0) {
    throw InputError("check_bias: need at least two phi values and one sample per node");
  }
  const auto [mn, mx] = std::minmax_element(phis.begin(), phis.end());
  if (*mn == *mx) {
    throw InputError("check_bias: phi values are all equal");
  }
  const Rng base = rng.split(rng());
  BiasFit fit;
  fit.conditional_means.reserve(phis.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    Rng r = base.split(i);
    stats::CompensatedSum s;
    for (std::size_t k = 0; k < samples_per_node; ++k) {
      s.add(estimator.map(family.sample(phis[i], r)));
    }
    const double m = s.value() / static_cast<double>(samples_per_node);
    fit.conditional_means.push_back(m);
    sxy += phis[i] * m;
    sxx += phis[i] * phis[i];
  }
  fit.slope = sxy / sxx;
  fit.zeta = 1.0 - fit.slope;
  double rss = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const double r = fit.conditional_means[i] - fit.slope * phis[i];
    rss += r * r;
  }
  fit.relative_residual = std::sqrt(rss / sxx);
  fit.is_affine = fit.relative_residual < kAffineTolerance;
  return fit;
}

double cr_bound_unbiased(const Prior& prior, const FisherFn& fisher) {
  bool vanishes = false;
  const double v = prior.expect([&](double phi) {
    const double f = fisher(phi);
    if (!(f > 0.0)) {
      vanishes = true;
      return 0.0;
    }
    return 1.0 / f;
  });
  return vanishes ? std::numeric_limits<double>::infinity() : v;
}

double cr_bound_unbiased(const Prior& prior, const OutcomeFamily& family) {
  return cr_bound_unbiased(prior, fisher_function(family));
}

double cr_bound_zeta(const Prior& prior, const FisherFn& fisher, double zeta) {
  if (zeta == 1.0) {
    return prior.second_moment();
  }
  return (1.0 - zeta) * (1.0 - zeta) * cr_bound_unbiased(prior, fisher) +
         zeta * zeta * prior.second_moment();
}

double cr_bound_zeta(const Prior& prior, const OutcomeFamily& family, double zeta) {
  return cr_bound_zeta(prior, fisher_function(family), zeta);
}

GridDensity tilde_q(const Prior& prior) {
  GridDensity out = prior.discretize();
  const double mu = prior.mean();
  const double var = prior.variance();
  const double dx = out.spacing();
  if (const auto* g = std::get_if<Prior::Gaussian>(&prior.kind())) {
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
      out.weights[i] = gaussian_tail_moment(*g, out.nodes[i]) / var * dx;
    }
    return out;
  }
  // Midpoint rule on the grid masses, summed from the nearer tail.
  const std::vector<double> w = out.weights;
  const std::size_t n = w.size();
  std::vector<double> upper(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    upper[i] = upper[i + 1] + (out.nodes[i] - mu) * w[i];
  }
  double lower = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double half = 0.5 * (out.nodes[i] - mu) * w[i];
    const double tail = out.nodes[i] >= mu ? upper[i + 1] + half : -(lower + half);
    lower += (out.nodes[i] - mu) * w[i];
    out.weights[i] = std::max(0.0, tail) / var * dx;
  }
  return out;
}

double average_fisher(const Prior& prior, const FisherFn& fisher) {
  const GridDensity q = prior.discretize();
  const GridDensity qt = tilde_q(prior);
  stats::CompensatedSum s;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    if (q.weights[i] > 0.0) {
      const double ratio = qt.weights[i] * qt.weights[i] / q.weights[i];
      if (ratio > 0.0) {
        s.add(fisher(q.nodes[i]) * ratio);
      }
    }
  }
  return s.value();
}

double cr_bound_correlated(const Prior& prior, const FisherFn& fisher, double zeta) {
  require_zero_mean(prior, "cr_bound_correlated");
  const double ft = average_fisher(prior, fisher);
  const double first = zeta == 1.0 ? 0.0 : (1.0 - zeta) * (1.0 - zeta) / ft;
  return first + zeta * zeta * prior.second_moment();
}

double cr_bound_correlated(const Prior& prior, const OutcomeFamily& family, double zeta) {
  return cr_bound_correlated(prior, fisher_function(family), zeta);
}

double van_trees_value(double average_fisher, double second_moment) {
  return 1.0 / (average_fisher + 1.0 / second_moment);
}

double van_trees_bound(const Prior& prior, const FisherFn& fisher) {
  require_zero_mean(prior, "van_trees_bound");
  return van_trees_value(average_fisher(prior, fisher), prior.second_moment());
}

double van_trees_bound(const Prior& prior, const OutcomeFamily& family) {
  return van_trees_bound(prior, fisher_function(family));
}

CostSums& CostSums::operator+=(const CostSums& o) {
  n += o.n;
  err2 += o.err2;
  err_phi += o.err_phi;
  phi2 += o.phi2;
  err4 += o.err4;
  return *this;
}

CostSums& CostSums::operator-=(const CostSums& o) {
  n -= o.n;
  err2 -= o.err2;
  err_phi -= o.err_phi;
  phi2 -= o.phi2;
  err4 -= o.err4;
  return *this;
}

CostEstimate estimation_cost(const OutcomeFamily& family, const Estimator& estimator,
                             const Prior& prior, std::size_t n_samples, Rng& rng,
                             unsigned threads) {
  if (n_samples < kCostChunks) {
    throw InputError("estimation_cost: need at least 64 samples");
  }
  const Rng base = rng.split(rng());
  CostEstimate out;
  out.chunks.resize(kCostChunks);
  parallel_for(kCostChunks, threads, [&](std::size_t c) {
    Rng r = base.split(c);
    const std::size_t n = n_samples / kCostChunks + (c < n_samples % kCostChunks ? 1 : 0);
    CostSums s;
    for (std::size_t k = 0; k < n; ++k) {
      const double phi = prior.sample(r);
      const double est = estimator.map(family.sample(phi, r));
      const double e = phi - est;
      s.n += 1.0;
      s.err2 += e * e;
      s.err4 += e * e * e * e;
      s.err_phi += e * phi;
      s.phi2 += phi * phi;
    }
    out.chunks[c] = s;
  });
  const CostSums total = stats::pairwise_sum<CostSums>(out.chunks);
  out.cost = total.err2 / total.n;
  out.cost_se = std::sqrt(std::max(0.0, total.err4 / total.n - out.cost * out.cost) / (total.n - 1.0));
  const auto jk = stats::jackknife<CostSums>(
      out.chunks, [](const CostSums& s) { return std::vector<double>{s.err_phi / s.phi2}; });
  out.zeta_hat = jk.estimate[0];
  out.zeta_se = jk.se[0];
  return out;
}

Margin correlated_margin(const CostEstimate& est, double average_fisher, double second_moment) {
  const auto jk = stats::jackknife<CostSums>(est.chunks, [&](const CostSums& s) {
    const double z = s.err_phi / s.phi2;
    const double bound = (1.0 - z) * (1.0 - z) / average_fisher + z * z * second_moment;
    return std::vector<double>{s.err2 / s.n - bound};
  });
  return {jk.estimate[0], jk.se[0]};
}

Margin fixed_margin(const CostEstimate& est, double bound) { return {est.cost - bound, est.cost_se}; }

} // namespace aclock::estimation
