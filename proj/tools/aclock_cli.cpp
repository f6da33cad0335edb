// aclock: run clock-loop and estimation experiments from a config file.
//
//   aclock run <config> [--seed N] [--threads N] [--out PATH] [--format csv|json]
//   aclock schema [experiment]
//
// Exit status: 0 all checks passed, 1 some check failed, 2 bad input or
// config, 3 numerical or model failure.

#include "aclock/config.hpp"
#include "aclock/errors.hpp"
#include "aclock/experiments.hpp"
#include "aclock/report_io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

void print_schema(const aclock::config::ExperimentSchema& s) {
  const auto print_keys = [](const char* section, const std::vector<aclock::config::KeySpec>& keys) {
    if (keys.empty()) {
      return;
    }
    std::cout << "  " << section << ":\n";
    for (const auto& k : keys) {
      std::cout << "    " << k.name << " (default";
      if (k.defaults.empty()) {
        std::cout << " none";
      }
      for (const auto& v : k.defaults) {
        if (const auto* d = std::get_if<double>(&v)) {
          if (k.kind == aclock::config::KeyKind::Integer) {
            std::cout << " " << static_cast<long long>(*d);
          } else {
            std::cout << " " << aclock::io::format_double(*d);
          }
        } else {
          std::cout << " " << std::get<std::string>(v);
        }
      }
      std::cout << "): " << k.help << "\n";
    }
  };
  std::cout << s.name << ": " << s.summary << "\n";
  print_keys("grid", s.grid);
  print_keys("settings", s.settings);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atomic clock feedback-loop experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::string> format;
  run->add_option("config", config_path, "YAML or JSON config")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--threads", threads, "worker threads (0 = all cores)");
  run->add_option("--out", out, "output file (stdout when absent)");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* schema = app.add_subcommand("schema", "list experiments and their config keys");
  std::string which;
  schema->add_option("experiment", which, "only this experiment");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*schema) {
      if (which.empty()) {
        for (const auto& s : aclock::config::schemas()) {
          print_schema(s);
        }
      } else {
        print_schema(aclock::config::schema(which));
      }
      return 0;
    }

    auto cfg = aclock::config::load_config(config_path);
    if (seed) {
      cfg.seed = *seed;
    }
    if (threads) {
      cfg.threads = *threads;
    }
    if (out) {
      cfg.output = *out;
    }
    if (format) {
      cfg.format = aclock::io::parse_format(*format);
    }

    const auto result = aclock::experiments::run(cfg);
    const aclock::io::Metadata meta{cfg.experiment, cfg.seed};
    if (cfg.output) {
      aclock::io::emit_file(result.table, cfg.format, meta, *cfg.output);
    } else {
      aclock::io::emit(result.table, cfg.format, meta, std::cout);
    }
    std::cerr << cfg.experiment << ": " << result.table.rows.size() << " rows, "
              << result.failed_checks << " failed checks\n";
    return result.passed() ? 0 : 1;
  } catch (const aclock::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
