#pragma once

#include "aclock/report_io.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

/// Experiment configuration files (YAML; JSON is accepted as a subset).
///
///   experiment: verify-gaussian
///   seed: 2024
///   threads: 4          # 0 = all cores
///   output: out.csv     # stdout when absent
///   format: csv         # or json
///   grid:               # scalars or lists; rows are the cartesian product
///     zeta: [-0.5, 0, 0.5]
///     D: [0, 0.05]
///   settings:           # scalars shared by every row
///     n_cycles: 20000
namespace aclock::config {

using Value = std::variant<double, std::string>;

enum class KeyKind { Number, Integer, Text };

struct KeySpec {
  std::string name;
  KeyKind kind = KeyKind::Number;
  /// Grid default (one or more values) or setting default (exactly one).
  /// An empty list makes the key optional with no value.
  std::vector<Value> defaults;
  /// Returns an error message for an invalid value.
  std::function<std::optional<std::string>(const Value&)> check;
  std::string help;
};

struct ExperimentSchema {
  std::string name;
  std::string summary;
  std::vector<KeySpec> grid;
  std::vector<KeySpec> settings;
};

const std::vector<ExperimentSchema>& schemas();
/// Throws InputError for an unknown experiment name.
const ExperimentSchema& schema(std::string_view experiment);

struct GridAxis {
  std::string key;
  std::vector<Value> values;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::optional<std::string> output;
  io::Format format = io::Format::Csv;
  /// One axis per grid key of the schema, in schema order.
  std::vector<GridAxis> grid;
  std::map<std::string, Value> settings;
};

/// Parses and validates a configuration. Errors are InputError messages of
/// the form "<source>:<line>: <field path>: <problem>".
ExperimentConfig parse_config(const std::string& text, std::string_view source = "config");
ExperimentConfig load_config(const std::string& path);

/// One parameter tuple of the grid.
struct Point {
  std::size_t index = 0;
  std::map<std::string, Value> values;

  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] const std::string& text(const std::string& key) const;
  [[nodiscard]] bool has(const std::string& key) const { return values.count(key) > 0; }
  /// "key=value, ..." for error messages.
  [[nodiscard]] std::string describe() const;
};

/// Cartesian product of the grid axes; the last axis varies fastest.
std::vector<Point> expand_grid(const ExperimentConfig& config);

double setting_number(const ExperimentConfig& config, const std::string& key);
std::optional<double> optional_setting(const ExperimentConfig& config, const std::string& key);

} // namespace aclock::config
