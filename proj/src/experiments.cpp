#include "aclock/experiments.hpp"

#include "aclock/analytic.hpp"
#include "aclock/clockloop.hpp"
#include "aclock/errors.hpp"
#include "aclock/estimation.hpp"
#include "aclock/noise.hpp"
#include "aclock/parallel.hpp"
#include "aclock/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace aclock::experiments {

namespace {

using config::ExperimentConfig;
using config::Point;
using io::Cell;

constexpr double kSigmas = 3.0;

/// Cells keyed by column name, laid out in the experiment's column order.
class Row {
public:
  void set(const std::string& name, Cell c) { cells_[name] = std::move(c); }
  void set(const std::string& name, const clockloop::Estimate& e) {
    cells_[name] = e.value;
    cells_[name + "_se"] = e.se;
  }
  void check(const std::string& name, bool ok) { cells_["pass_" + name] = ok; }
  void skip_check(const std::string& name) { cells_["pass_" + name] = std::monostate{}; }

  std::vector<Cell> layout(const std::vector<std::string>& columns) const {
    if (cells_.size() != columns.size()) {
      throw std::logic_error("row has " + std::to_string(cells_.size()) + " cells for " +
                             std::to_string(columns.size()) + " columns");
    }
    std::vector<Cell> out;
    out.reserve(columns.size());
    for (const auto& c : columns) {
      const auto it = cells_.find(c);
      if (it == cells_.end()) {
        throw std::logic_error("row is missing column " + c);
      }
      out.push_back(it->second);
    }
    return out;
  }

private:
  std::map<std::string, Cell> cells_;
};

std::vector<std::string> with_se(std::initializer_list<std::string> names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    out.push_back(n);
    out.push_back(n + "_se");
  }
  return out;
}

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) {
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<std::string> grid_columns(const std::string& experiment) {
  std::vector<std::string> out;
  for (const auto& k : config::schema(experiment).grid) {
    out.push_back(k.name);
  }
  return out;
}

void set_params(Row& row, const Point& p) {
  for (const auto& [k, v] : p.values) {
    if (const auto* d = std::get_if<double>(&v)) {
      row.set(k, *d);
    } else {
      row.set(k, std::get<std::string>(v));
    }
  }
}

noise::NoiseModel noise_model(const Point& p) {
  const auto& kind = p.text("noise");
  if (kind == "zero") {
    return noise::NoiseModel::zero();
  }
  if (kind == "brownian") {
    return noise::NoiseModel::brownian(p.number("D"));
  }
  return noise::NoiseModel::power_law(p.number("D"), p.number("alpha"));
}

bool within(double diff, double se, double sigmas = kSigmas) {
  if (std::isnan(diff)) {
    return false;
  }
  if (!(se > 0.0)) {
    return std::abs(diff) <= 1e-12;
  }
  return std::abs(diff) <= sigmas * se;
}

Cell optional_cell(const std::optional<double>& v) {
  return v ? Cell(*v) : Cell(std::monostate{});
}

clockloop::StatsOptions loop_options(const ExperimentConfig& cfg) {
  clockloop::StatsOptions o;
  if (const auto b = config::optional_setting(cfg, "burn_in")) {
    o.burn_in = static_cast<std::size_t>(*b);
  }
  o.max_lag = static_cast<std::size_t>(config::setting_number(cfg, "max_lag"));
  o.block = static_cast<std::size_t>(config::setting_number(cfg, "block"));
  return o;
}

clockloop::StationaryReport ensemble(const ExperimentConfig& cfg, const clockloop::ClockSpec& spec,
                                     clockloop::StatsOptions opts, Rng& rng) {
  if (spec.estimator.declared_zeta) {
    opts.zeta = spec.estimator.declared_zeta;
  }
  return clockloop::run_ensemble(spec,
                                 static_cast<std::size_t>(config::setting_number(cfg, "n_trajectories")),
                                 static_cast<std::size_t>(config::setting_number(cfg, "n_cycles")), rng,
                                 opts, cfg.threads);
}

// ---------------------------------------------------------------- simulate

std::vector<std::string> simulate_columns() {
  return concat({grid_columns("simulate"),
                 {"n_samples"},
                 with_se({"mean_y", "sigma2", "zeta_hat", "clock_diffusion", "clock_diffusion_block",
                          "sigma2_lo_hat", "alpha_hat", "beta_hat", "allan", "dick_empirical",
                          "super_slope", "a_bound_slope"}),
                 {"qfi", "variance_bound", "variance_margin", "diffusion_bound", "diffusion_margin", "pass_unbiased",
                  "pass_supermartingale", "pass_bounds", "pass_lln", "pass_dick"}});
}

Row simulate_row(const ExperimentConfig& cfg, const Point& p, Rng& rng) {
  clockloop::ClockSpec spec;
  spec.T = p.number("T");
  spec.noise = noise_model(p);
  spec.y0 = p.number("y0");
  const bool gaussian = p.text("reference") == "gaussian";
  if (gaussian) {
    spec.reference = clockloop::GaussianReference{p.number("F0"), p.number("extra_noise_var")};
    spec.estimator = estimation::scaled_identity(p.number("zeta"));
  } else {
    spec.reference = clockloop::RamseyReference{p.number("omega0")};
    spec.estimator = clockloop::ramsey_fringe_estimator(spec.T, p.number("omega0"), p.number("gain"));
  }
  const auto r = ensemble(cfg, spec, loop_options(cfg), rng);

  Row row;
  set_params(row, p);
  row.set("n_samples", static_cast<std::int64_t>(r.n_samples));
  row.set("mean_y", r.mean_y);
  row.set("sigma2", r.sigma2);
  row.set("zeta_hat", r.zeta_hat);
  row.set("clock_diffusion", r.clock_diffusion);
  row.set("clock_diffusion_block", r.clock_diffusion_block);
  row.set("sigma2_lo_hat", r.sigma2_lo_hat);
  row.set("alpha_hat", r.alpha_hat);
  row.set("beta_hat", r.beta_hat);
  row.set("allan", r.allan);
  row.set("dick_empirical", r.dick_empirical);
  row.set("super_slope", r.super_slope);
  row.set("a_bound_slope", r.a_bound_slope);
  const double qfi = clockloop::reference_qfi(spec.reference, spec.T);
  row.set("qfi", qfi);
  row.check("unbiased", within(r.mean_y.value, r.mean_y.se, 4.0));
  const auto& a = r.clock_diffusion;
  const auto& b = r.clock_diffusion_block;
  row.check("lln", within(a.value - b.value, std::hypot(a.se, b.se)));
  if (gaussian) {
    const auto bc = clockloop::bound_check(r, spec, qfi);
    row.set("variance_bound", bc.variance_bound);
    row.set("variance_margin", bc.variance_margin.value);
    row.set("diffusion_bound", bc.diffusion_bound);
    row.set("diffusion_margin", bc.diffusion_margin.value);
    row.check("bounds", bc.consistent(kSigmas));
    row.check("supermartingale", within(r.super_slope.value - spec.zeta(), r.super_slope.se));
    const auto& d = r.dick_empirical;
    row.check("dick", within(a.value - d.value, std::hypot(a.se, d.se)));
  } else {
    for (const char* c : {"variance_bound", "variance_margin", "diffusion_bound", "diffusion_margin"}) {
      row.set(c, std::monostate{});
    }
    row.skip_check("bounds");
    row.skip_check("supermartingale");
    row.skip_check("dick");
  }
  return row;
}

// --------------------------------------------------------- verify-gaussian

std::vector<std::string> verify_columns() {
  return concat({grid_columns("verify-gaussian"),
                 {"n_samples"},
                 with_se({"sigma2"}),
                 {"sigma2_theory", "sigma2_rel_err"},
                 with_se({"clock_diffusion"}),
                 {"clock_diffusion_theory"},
                 with_se({"clock_diffusion_block", "zeta_hat", "variance_margin", "diffusion_margin"}),
                 {"pass_sigma2", "pass_clock_diffusion", "pass_bounds"}});
}

Row verify_row(const ExperimentConfig& cfg, const Point& p, Rng& rng) {
  const analytic::GaussianClockParams g{p.number("F0"), p.number("D"), p.number("zeta"), p.number("T")};
  g.validate();
  const auto spec = clockloop::gaussian_clock(g.F0, g.D, g.zeta, g.T);
  const auto r = ensemble(cfg, spec, loop_options(cfg), rng);
  const double s2 = analytic::stationary_variance(g);
  const double cd = analytic::stationary_clock_diffusion(g);
  const auto bc = clockloop::bound_check(r, spec, g.F0);

  Row row;
  set_params(row, p);
  row.set("n_samples", static_cast<std::int64_t>(r.n_samples));
  row.set("sigma2", r.sigma2);
  row.set("sigma2_theory", s2);
  row.set("sigma2_rel_err", (r.sigma2.value - s2) / s2);
  row.set("clock_diffusion", r.clock_diffusion);
  row.set("clock_diffusion_theory", cd);
  row.set("clock_diffusion_block", r.clock_diffusion_block);
  row.set("zeta_hat", r.zeta_hat);
  row.set("variance_margin", bc.variance_margin);
  row.set("diffusion_margin", bc.diffusion_margin);
  row.check("sigma2", within(r.sigma2.value - s2, r.sigma2.se));
  row.check("clock_diffusion", within(r.clock_diffusion.value - cd, r.clock_diffusion.se));
  row.check("bounds", bc.consistent(kSigmas));
  return row;
}

// ------------------------------------------------------------------ bounds

std::vector<std::string> bounds_columns() {
  return concat({grid_columns("bounds"),
                 {"sigma2_lo", "alpha_noise", "beta_noise", "variance_bound", "diffusion_bound",
                  "sigma2_closed_form", "clock_diffusion_closed_form", "pass_saturation"}});
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

Row bounds_row(const ExperimentConfig&, const Point& p, Rng&) {
  const double T = p.number("T");
  const double F0 = p.number("F0");
  const double zeta = p.number("zeta");
  const auto model = noise_model(p);
  const auto m = noise::moments(model, T);
  const double alpha = m.alpha.value_or(0.0);
  const double beta = m.beta.value_or(1.0);
  const double vb = analytic::variance_bound(F0, m.sigma2_lo, alpha, beta, zeta);
  const double cw = analytic::diffusion_bound(F0, m.sigma2_lo, beta, zeta, T);

  Row row;
  set_params(row, p);
  row.set("sigma2_lo", m.sigma2_lo);
  row.set("alpha_noise", optional_cell(m.alpha));
  row.set("beta_noise", optional_cell(m.beta));
  row.set("variance_bound", vb);
  row.set("diffusion_bound", cw);
  if (p.text("noise") != "power-law") {
    const double D = p.text("noise") == "zero" ? 0.0 : p.number("D");
    const analytic::GaussianClockParams g{F0, D, zeta, T};
    const double s2 = analytic::stationary_variance(g);
    const double cd = analytic::stationary_clock_diffusion(g);
    row.set("sigma2_closed_form", s2);
    row.set("clock_diffusion_closed_form", cd);
    row.check("saturation", close_rel(s2, vb, 1e-12) && close_rel(cd, cw, 1e-12));
  } else {
    row.set("sigma2_closed_form", std::monostate{});
    row.set("clock_diffusion_closed_form", std::monostate{});
    row.skip_check("saturation");
  }
  return row;
}

// ---------------------------------------------------------------- optimize

std::vector<std::string> optimize_columns() {
  return concat({grid_columns("optimize"),
                 {"T_star", "min_diffusion", "T_numeric", "min_numeric", "T_rel_diff",
                  "balance_residual", "nspin_exponent", "nspin_slope", "nspin_rel_err",
                  "entanglement_gain_exponent", "pass_minimizer", "pass_balance", "pass_nspin"}});
}

Row optimize_row(const ExperimentConfig& cfg, const Point& p, Rng&) {
  analytic::OptimizerInput in;
  in.A = p.number("A");
  in.D_lo = p.number("D_lo");
  in.alpha = p.number("alpha");
  in.beta = p.has("beta") ? p.number("beta") : (in.alpha + 2.0) * (in.alpha + 1.0) / 2.0;
  in.zeta = p.number("zeta");
  const double eps = p.number("epsilon");
  const auto exact = analytic::optimal_interrogation_time(in);
  const auto numeric = analytic::minimize_numerically(in);
  const double rel = std::abs(numeric.T_star - exact.T_star) / exact.T_star;
  const double residual = analytic::balance_residual(in, exact.T_star);
  std::vector<double> ns;
  const double n_max = config::setting_number(cfg, "n_max");
  for (double n = 2.0; n <= n_max; n *= 2.0) {
    ns.push_back(n);
  }
  const double expected = analytic::nspin_exponent(eps, in.alpha);
  const double slope = analytic::nspin_fitted_slope(in, eps, ns);
  const double slope_err = std::abs(slope - expected) / std::abs(expected);

  Row row;
  set_params(row, p);
  row.set("beta", in.beta);
  row.set("T_star", exact.T_star);
  row.set("min_diffusion", exact.min_diffusion);
  row.set("T_numeric", numeric.T_star);
  row.set("min_numeric", numeric.min_diffusion);
  row.set("T_rel_diff", rel);
  row.set("balance_residual", residual);
  row.set("nspin_exponent", expected);
  row.set("nspin_slope", slope);
  row.set("nspin_rel_err", slope_err);
  row.set("entanglement_gain_exponent", analytic::entanglement_gain_exponent(eps, in.alpha));
  row.check("minimizer", rel <= 1e-8);
  row.check("balance", std::abs(residual) <= 1e-10);
  row.check("nspin", slope_err <= 0.01);
  return row;
}

// ------------------------------------------------------------------- allan

std::vector<std::string> allan_columns() {
  return concat({grid_columns("allan"), with_se({"allan"}), {"allan_theory", "pass_allan"}});
}

Row allan_row(const ExperimentConfig& cfg, const Point& p, Rng& rng) {
  const double T = p.number("T");
  const double y0 = p.number("y0");
  const auto model = noise_model(p);
  const auto est = clockloop::allan_simplified(
      model, T, y0, static_cast<std::size_t>(config::setting_number(cfg, "n_samples")), rng);
  const double theory = T * (y0 * y0 + noise::moments(model, T).sigma2_lo);
  Row row;
  set_params(row, p);
  row.set("allan", est);
  row.set("allan_theory", theory);
  row.check("allan", within(est.value - theory, est.se));
  return row;
}

// ------------------------------------------------------- estimation-bounds

std::vector<std::string> estimation_columns() {
  return concat({grid_columns("estimation-bounds"),
                 with_se({"cost", "zeta_hat"}),
                 {"cr_zeta", "correlated_bound", "van_trees"},
                 with_se({"margin_zeta", "margin_correlated"}),
                 {"pass_cr_zeta", "pass_correlated", "pass_saturation"}});
}

Row estimation_row(const ExperimentConfig& cfg, const Point& p, Rng& rng) {
  const double zeta = p.number("zeta");
  const double F0 = p.number("F0");
  const double extra = p.number("extra_noise_var");
  const auto prior = estimation::Prior::gaussian(0.0, p.number("prior_variance"));
  const auto family = estimation::gaussian_family(1.0 / F0 + extra);
  const auto estimator = estimation::scaled_identity(zeta);
  // Bounds use the reference's QFI, so added readout noise shows up as a margin.
  const estimation::FisherFn fisher = [F0](double) { return F0; };
  const auto cost = estimation::estimation_cost(
      family, estimator, prior, static_cast<std::size_t>(config::setting_number(cfg, "n_samples")),
      rng, cfg.threads);
  const double ftilde = estimation::average_fisher(prior, fisher);
  const double e2 = prior.second_moment();
  const double cr = estimation::cr_bound_zeta(prior, fisher, zeta);
  const auto m_zeta = estimation::fixed_margin(cost, cr);
  const auto m_corr = estimation::correlated_margin(cost, ftilde, e2);
  const double zh = cost.zeta_hat;

  Row row;
  set_params(row, p);
  row.set("cost", clockloop::Estimate{cost.cost, cost.cost_se});
  row.set("zeta_hat", clockloop::Estimate{cost.zeta_hat, cost.zeta_se});
  row.set("cr_zeta", cr);
  row.set("correlated_bound", (1.0 - zh) * (1.0 - zh) / ftilde + zh * zh * e2);
  row.set("van_trees", estimation::van_trees_value(ftilde, e2));
  row.set("margin_zeta", clockloop::Estimate{m_zeta.value, m_zeta.se});
  row.set("margin_correlated", clockloop::Estimate{m_corr.value, m_corr.se});
  row.check("cr_zeta", m_zeta.consistent(kSigmas));
  row.check("correlated", m_corr.consistent(kSigmas));
  if (extra == 0.0) {
    row.check("saturation", within(m_zeta.value, m_zeta.se));
  } else {
    row.skip_check("saturation");
  }
  return row;
}

// --------------------------------------------------------------------- qfi

std::vector<std::string> qfi_columns() {
  return concat({grid_columns("qfi"),
                 {"dimension", "qfi", "qfi_hamiltonian", "qfi_expected", "sld_fisher",
                  "random_povms", "max_random_fisher", "pass_hamiltonian", "pass_expected",
                  "pass_braunstein_caves"}});
}

Row qfi_row(const ExperimentConfig& cfg, const Point& p, Rng& rng) {
  using namespace quantum;
  const auto& kind = p.text("family");
  const int n = static_cast<int>(p.number("n_spins"));
  std::optional<QuantumFamily> family;
  double expected = 0.0;
  if (kind == "ghz") {
    family = QuantumFamily::hamiltonian(collective_sz(n), ghz_projector(n));
    expected = 4.0 * n * n;
  } else if (kind == "product") {
    family = QuantumFamily::hamiltonian(collective_sz(n), product_plus_projector(n));
    expected = 4.0 * n;
  } else {
    const double T = p.number("T");
    const double w = p.number("omega0");
    family = ramsey_family(T, w).family;
    expected = T * T * w * w;
  }
  const double phi = p.number("phi");
  family->check_state(phi);
  const double f = qfi(*family, phi);
  const double fh = qfi_hamiltonian(*family);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sld(*family, phi));
  const double f_sld = classical_fisher_of_povm(*family, RankOnePovm(es.eigenvectors()), phi);
  const auto dim = family->dimension();
  const auto n_povms = static_cast<std::size_t>(config::setting_number(cfg, "n_povms"));
  const bool do_random = dim <= static_cast<Eigen::Index>(config::setting_number(cfg, "povm_max_dimension"));
  double max_random = 0.0;
  std::size_t used = 0;
  if (do_random) {
    for (; used < n_povms; ++used) {
      Rng r = rng.split(used);
      const auto povm = random_rank1_povm(dim, static_cast<std::size_t>(dim) + 1, r);
      max_random = std::max(max_random, classical_fisher_of_povm(*family, povm, phi));
    }
  }
  const double scale = std::max(1.0, std::abs(f));

  Row row;
  set_params(row, p);
  row.set("dimension", static_cast<std::int64_t>(dim));
  row.set("qfi", f);
  row.set("qfi_hamiltonian", fh);
  row.set("qfi_expected", expected);
  row.set("sld_fisher", f_sld);
  row.set("random_povms", static_cast<std::int64_t>(used));
  row.set("max_random_fisher", used > 0 ? Cell(max_random) : Cell(std::monostate{}));
  row.check("hamiltonian", std::abs(f - fh) <= 1e-8 * scale);
  row.check("expected", std::abs(f - expected) <= 1e-8 * scale);
  row.check("braunstein_caves",
            std::abs(f_sld - f) <= 1e-8 * scale && max_random <= f + 1e-8 * scale);
  return row;
}

struct Runner {
  std::vector<std::string> (*columns)();
  Row (*row)(const ExperimentConfig&, const Point&, Rng&);
};

const Runner& runner(const std::string& experiment) {
  static const std::map<std::string, Runner> all = {
      {"simulate", {simulate_columns, simulate_row}},
      {"verify-gaussian", {verify_columns, verify_row}},
      {"bounds", {bounds_columns, bounds_row}},
      {"optimize", {optimize_columns, optimize_row}},
      {"allan", {allan_columns, allan_row}},
      {"estimation-bounds", {estimation_columns, estimation_row}},
      {"qfi", {qfi_columns, qfi_row}},
  };
  config::schema(experiment);
  return all.at(experiment);
}

} // namespace

std::vector<std::string> columns(const std::string& experiment) {
  return runner(experiment).columns();
}

RunResult run(const ExperimentConfig& cfg) {
  const Runner& r = runner(cfg.experiment);
  RunResult out;
  out.table.columns = r.columns();
  const Rng master(cfg.seed);
  for (const auto& point : config::expand_grid(cfg)) {
    Rng rng = master.split(point.index);
    Row row;
    try {
      row = r.row(cfg, point, rng);
    } catch (const InputError& e) {
      throw InputError("grid point " + std::to_string(point.index) + " (" + point.describe() +
                       "): " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("grid point " + std::to_string(point.index) + " (" +
                               point.describe() + "): " + e.what());
    }
    auto cells = row.layout(out.table.columns);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto* b = std::get_if<bool>(&cells[i]);
      if (b && !*b && out.table.columns[i].rfind("pass_", 0) == 0) {
        ++out.failed_checks;
      }
    }
    out.table.add_row(std::move(cells));
  }
  return out;
}

} // namespace aclock::experiments
