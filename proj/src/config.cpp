#include "aclock/config.hpp"

#include "aclock/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace aclock::config {

namespace {

using Check = std::function<std::optional<std::string>(const Value&)>;

Check number_check(std::function<bool(double)> ok, std::string what) {
  return [ok = std::move(ok), what = std::move(what)](const Value& v) -> std::optional<std::string> {
    const double x = std::get<double>(v);
    if (std::isnan(x) || !ok(x)) {
      std::ostringstream msg;
      msg << "value " << x << " must be " << what;
      return msg.str();
    }
    return std::nullopt;
  };
}

Check positive() {
  return number_check([](double x) { return x > 0.0; }, "positive");
}
Check finite_positive() {
  return number_check([](double x) { return x > 0.0 && std::isfinite(x); }, "positive and finite");
}
Check non_negative() {
  return number_check([](double x) { return x >= 0.0 && std::isfinite(x); }, ">= 0 and finite");
}
Check finite() {
  return number_check([](double x) { return std::isfinite(x); }, "finite");
}
Check stable_zeta() {
  return number_check([](double x) { return std::abs(x) < 1.0; },
                      "inside (-1, 1) (stability condition |zeta| < 1)");
}
Check above(double lo) {
  return number_check([lo](double x) { return x > lo && std::isfinite(x); },
                      "finite and > " + std::to_string(lo));
}
Check int_range(double lo, double hi) {
  std::ostringstream what;
  what << "an integer in [" << lo << ", " << hi << "]";
  return number_check([lo, hi](double x) { return x >= lo && x <= hi; }, what.str());
}
Check one_of(std::vector<std::string> options) {
  return [options = std::move(options)](const Value& v) -> std::optional<std::string> {
    const auto& s = std::get<std::string>(v);
    if (std::find(options.begin(), options.end(), s) != options.end()) {
      return std::nullopt;
    }
    std::string msg = "'" + s + "' is not one of";
    for (const auto& o : options) {
      msg += " " + o;
    }
    return msg;
  };
}

constexpr double kMaxCount = 1e12;

KeySpec num(std::string name, std::vector<double> defaults, Check check, std::string help) {
  std::vector<Value> d(defaults.begin(), defaults.end());
  return {std::move(name), KeyKind::Number, std::move(d), std::move(check), std::move(help)};
}
KeySpec integer(std::string name, std::vector<double> defaults, double lo, double hi,
                std::string help) {
  std::vector<Value> d(defaults.begin(), defaults.end());
  return {std::move(name), KeyKind::Integer, std::move(d), int_range(lo, hi), std::move(help)};
}
KeySpec text(std::string name, std::string def, std::vector<std::string> options, std::string help) {
  return {std::move(name), KeyKind::Text, {Value(std::move(def))}, one_of(std::move(options)),
          std::move(help)};
}

std::vector<KeySpec> noise_keys(double default_D) {
  return {text("noise", "brownian", {"zero", "brownian", "power-law"}, "oscillator noise kind"),
          num("D", {default_D}, non_negative(), "noise amplitude (Brownian: Var = 2 D t)"),
          num("alpha", {1.0}, non_negative(), "power-law exponent (power-law noise only)")};
}

std::vector<KeySpec> loop_settings() {
  return {integer("n_cycles", {20000}, 2, kMaxCount, "cycles per trajectory"),
          integer("n_trajectories", {64}, 1, 1e6, "independent trajectories"),
          integer("burn_in", {}, 0, kMaxCount, "discarded cycles (default max(1000, 20/(1-|zeta|)))"),
          integer("max_lag", {50}, 1, 1e5, "largest autocovariance lag"),
          integer("block", {400}, 1, 1e9, "block length of the block-variance diffusion")};
}

std::vector<ExperimentSchema> build_schemas() {
  std::vector<ExperimentSchema> s;

  {
    ExperimentSchema e{"simulate", "run the feedback loop and report stationary statistics", {}, {}};
    e.grid = noise_keys(0.05);
    e.grid.push_back(num("T", {1.0}, finite_positive(), "interrogation time"));
    e.grid.push_back(text("reference", "gaussian", {"gaussian", "ramsey"}, "reference family"));
    e.grid.push_back(num("F0", {4.0}, positive(), "Gaussian reference Fisher information"));
    e.grid.push_back(num("extra_noise_var", {0.0}, non_negative(), "added readout variance"));
    e.grid.push_back(num("zeta", {0.0}, stable_zeta(), "estimator bias (Gaussian reference)"));
    e.grid.push_back(num("omega0", {1.0}, finite_positive(), "Ramsey transition frequency"));
    e.grid.push_back(num("gain", {0.5}, finite_positive(), "Ramsey fringe estimator gain"));
    e.grid.push_back(num("y0", {0.0}, finite(), "initial frequency error"));
    e.settings = loop_settings();
    s.push_back(std::move(e));
  }
  {
    ExperimentSchema e{"verify-gaussian", "compare the Gaussian clock with its closed form", {}, {}};
    e.grid = {num("F0", {4.0}, positive(), "reference Fisher information"),
              num("D", {0.0, 0.05}, non_negative(), "Brownian noise amplitude"),
              num("zeta", {-0.5, 0.0, 0.5}, stable_zeta(), "estimator bias"),
              num("T", {1.0}, finite_positive(), "interrogation time")};
    e.settings = loop_settings();
    s.push_back(std::move(e));
  }
  {
    ExperimentSchema e{"bounds", "evaluate the stationary lower bounds", {}, {}};
    e.grid = noise_keys(0.05);
    e.grid.push_back(num("T", {1.0}, finite_positive(), "interrogation time"));
    e.grid.push_back(num("F0", {4.0}, positive(), "reference Fisher information"));
    e.grid.push_back(num("zeta", {0.0}, stable_zeta(), "estimator bias"));
    s.push_back(std::move(e));
  }
  {
    ExperimentSchema e{"optimize", "optimal interrogation time and N-spin scaling", {}, {}};
    e.grid = {num("A", {0.25}, finite_positive(), "1/F_T = A / T^2"),
              num("D_lo", {1.0 / 24.0}, finite_positive(), "sigma2_lo(T) = D_lo T^alpha"),
              num("alpha", {1.0}, above(-1.0), "noise exponent"),
              num("beta", {}, finite_positive(), "noise constant (default (alpha+2)(alpha+1)/2)"),
              num("zeta", {0.0}, stable_zeta(), "estimator bias"),
              num("epsilon", {0.0}, number_check([](double x) { return x >= 0.0 && x <= 1.0; }, "in [0, 1]"),
                  "entanglement exponent, F_T ~ N^(1+epsilon)")};
    e.settings = {integer("n_max", {1024}, 4, 1e9, "largest N in the scaling fit (powers of two from 2)")};
    s.push_back(std::move(e));
  }
  {
    ExperimentSchema e{"allan", "simplified Allan variance of the free-running oscillator", {}, {}};
    e.grid = noise_keys(0.25);
    e.grid.push_back(num("T", {1.0}, finite_positive(), "averaging time"));
    e.grid.push_back(num("y0", {0.0}, finite(), "initial frequency error"));
    e.settings = {integer("n_samples", {100000}, 2, kMaxCount, "Monte Carlo cycles")};
    s.push_back(std::move(e));
  }
  {
    ExperimentSchema e{"estimation-bounds", "Monte Carlo estimation cost against Cramer-Rao bounds", {}, {}};
    e.grid = {num("zeta", {0.0, 0.5}, stable_zeta(), "estimator bias"),
              num("F0", {4.0}, finite_positive(), "reference Fisher information"),
              num("prior_variance", {1.0}, finite_positive(), "zero-mean Gaussian prior variance"),
              num("extra_noise_var", {0.0}, non_negative(), "added readout variance (degrades the estimator)")};
    e.settings = {integer("n_samples", {200000}, 64, kMaxCount, "Monte Carlo samples")};
    s.push_back(std::move(e));
  }
  {
    ExperimentSchema e{"qfi", "quantum Fisher information of reference families", {}, {}};
    e.grid = {text("family", "ghz", {"ghz", "product", "ramsey"}, "state family"),
              integer("n_spins", {2}, 1, 12, "spins (ghz, product)"),
              num("phi", {0.3}, finite(), "parameter value"),
              num("T", {1.0}, finite_positive(), "interrogation time (ramsey)"),
              num("omega0", {1.0}, finite_positive(), "transition frequency (ramsey)")};
    e.settings = {integer("n_povms", {100}, 0, 1e6, "random rank-one POVMs per row"),
                  integer("povm_max_dimension", {256}, 2, 4096, "skip random POVMs above this dimension")};
    s.push_back(std::move(e));
  }
  return s;
}

std::string where(std::string_view source, const YAML::Node& node) {
  std::ostringstream out;
  out << source;
  if (node.Mark().line >= 0) {
    out << ":" << node.Mark().line + 1;
  }
  return out.str();
}

[[noreturn]] void fail(std::string_view source, const YAML::Node& node, const std::string& path,
                       const std::string& problem) {
  throw InputError(where(source, node) + ": " + path + ": " + problem);
}

Value read_value(std::string_view source, const YAML::Node& node, const KeySpec& key,
                 const std::string& path) {
  if (!node.IsScalar()) {
    fail(source, node, path, "expected a scalar");
  }
  Value v;
  if (key.kind == KeyKind::Text) {
    v = node.as<std::string>();
  } else {
    double x = 0.0;
    try {
      x = node.as<double>();
    } catch (const YAML::Exception&) {
      fail(source, node, path, "expected a number, got '" + node.Scalar() + "'");
    }
    if (key.kind == KeyKind::Integer && x != std::floor(x)) {
      fail(source, node, path, "expected an integer, got '" + node.Scalar() + "'");
    }
    v = x;
  }
  if (key.check) {
    if (auto err = key.check(v)) {
      fail(source, node, path, *err);
    }
  }
  return v;
}

const KeySpec* find_key(const std::vector<KeySpec>& keys, const std::string& name) {
  for (const auto& k : keys) {
    if (k.name == name) {
      return &k;
    }
  }
  return nullptr;
}

std::string known_keys(const std::vector<KeySpec>& keys) {
  std::string out;
  for (const auto& k : keys) {
    out += (out.empty() ? "" : ", ") + k.name;
  }
  return out.empty() ? "(none)" : out;
}

void check_unknown(std::string_view source, const YAML::Node& map, const std::vector<KeySpec>& keys,
                   const std::string& section) {
  for (const auto& kv : map) {
    const auto name = kv.first.as<std::string>();
    if (!find_key(keys, name)) {
      fail(source, kv.first, section + "." + name,
           "unknown key for this experiment (known: " + known_keys(keys) + ")");
    }
  }
}

} // namespace

const std::vector<ExperimentSchema>& schemas() {
  static const std::vector<ExperimentSchema> all = build_schemas();
  return all;
}

const ExperimentSchema& schema(std::string_view experiment) {
  for (const auto& s : schemas()) {
    if (s.name == experiment) {
      return s;
    }
  }
  std::string names;
  for (const auto& s : schemas()) {
    names += " " + s.name;
  }
  throw InputError("unknown experiment '" + std::string(experiment) + "' (expected one of" + names + ")");
}

ExperimentConfig parse_config(const std::string& text, std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream msg;
    msg << source << ":" << e.mark.line + 1 << ": syntax error: " << e.msg;
    throw InputError(msg.str());
  }
  if (!root.IsMap()) {
    throw InputError(std::string(source) + ": top level must be a mapping");
  }
  static const std::set<std::string> top = {"experiment", "seed",  "threads", "output",
                                            "format",     "grid",  "settings"};
  for (const auto& kv : root) {
    const auto name = kv.first.as<std::string>();
    if (!top.count(name)) {
      fail(source, kv.first, name, "unknown top-level key");
    }
  }
  if (!root["experiment"]) {
    throw InputError(std::string(source) + ": experiment: missing required key");
  }
  ExperimentConfig cfg;
  cfg.experiment = root["experiment"].as<std::string>();
  const ExperimentSchema* sch = nullptr;
  try {
    sch = &schema(cfg.experiment);
  } catch (const InputError& e) {
    fail(source, root["experiment"], "experiment", e.what());
  }

  if (const auto n = root["seed"]) {
    try {
      cfg.seed = n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail(source, n, "seed", "expected an unsigned 64-bit integer");
    }
  }
  if (const auto n = root["threads"]) {
    try {
      cfg.threads = n.as<unsigned>();
    } catch (const YAML::Exception&) {
      fail(source, n, "threads", "expected a non-negative integer");
    }
  }
  if (const auto n = root["output"]) {
    cfg.output = n.as<std::string>();
  }
  if (const auto n = root["format"]) {
    try {
      cfg.format = io::parse_format(n.as<std::string>());
    } catch (const InputError& e) {
      fail(source, n, "format", e.what());
    }
  }

  const YAML::Node grid = root["grid"];
  if (grid && !grid.IsMap()) {
    fail(source, grid, "grid", "expected a mapping");
  }
  if (grid) {
    check_unknown(source, grid, sch->grid, "grid");
  }
  for (const auto& key : sch->grid) {
    GridAxis axis{key.name, {}};
    const YAML::Node n = grid ? grid[key.name] : YAML::Node();
    const std::string path = "grid." + key.name;
    if (!grid || !n) {
      axis.values = key.defaults;
    } else if (n.IsSequence()) {
      if (n.size() == 0) {
        fail(source, n, path, "empty list");
      }
      for (std::size_t i = 0; i < n.size(); ++i) {
        axis.values.push_back(read_value(source, n[i], key, path + "[" + std::to_string(i) + "]"));
      }
    } else {
      axis.values.push_back(read_value(source, n, key, path));
    }
    cfg.grid.push_back(std::move(axis));
  }

  const YAML::Node settings = root["settings"];
  if (settings && !settings.IsMap()) {
    fail(source, settings, "settings", "expected a mapping");
  }
  if (settings) {
    check_unknown(source, settings, sch->settings, "settings");
  }
  for (const auto& key : sch->settings) {
    const YAML::Node n = settings ? settings[key.name] : YAML::Node();
    if (settings && n) {
      cfg.settings[key.name] = read_value(source, n, key, "settings." + key.name);
    } else if (!key.defaults.empty()) {
      cfg.settings[key.name] = key.defaults.front();
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw InputError("cannot read config file '" + path + "'");
  }
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str(), path);
}

double Point::number(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) {
    throw InputError("grid point has no value for '" + key + "'");
  }
  return std::get<double>(it->second);
}

const std::string& Point::text(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) {
    throw InputError("grid point has no value for '" + key + "'");
  }
  return std::get<std::string>(it->second);
}

std::string Point::describe() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, v] : values) {
    out << (first ? "" : ", ") << k << "=";
    if (const auto* d = std::get_if<double>(&v)) {
      out << io::format_double(*d);
    } else {
      out << std::get<std::string>(v);
    }
    first = false;
  }
  return out.str();
}

std::vector<Point> expand_grid(const ExperimentConfig& config) {
  std::vector<Point> points{Point{}};
  for (const auto& axis : config.grid) {
    if (axis.values.empty()) {
      continue;
    }
    std::vector<Point> next;
    next.reserve(points.size() * axis.values.size());
    for (const auto& p : points) {
      for (const auto& v : axis.values) {
        Point q = p;
        q.values[axis.key] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].index = i;
  }
  return points;
}

double setting_number(const ExperimentConfig& config, const std::string& key) {
  const auto v = optional_setting(config, key);
  if (!v) {
    throw InputError("setting '" + key + "' has no value");
  }
  return *v;
}

std::optional<double> optional_setting(const ExperimentConfig& config, const std::string& key) {
  const auto it = config.settings.find(key);
  if (it == config.settings.end()) {
    return std::nullopt;
  }
  return std::get<double>(it->second);
}

} // namespace aclock::config
