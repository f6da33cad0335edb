#include "aclock/config.hpp"
#include "aclock/errors.hpp"
#include "aclock/report_io.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

namespace cfg = aclock::config;
namespace io = aclock::io;

namespace {

std::string error_of(const std::string& text) {
  try {
    cfg::parse_config(text, "test.yaml");
  } catch (const aclock::InputError& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST(Config, DefaultsFillGrid) {
  const auto c = cfg::parse_config("experiment: verify-gaussian\n");
  EXPECT_EQ(c.experiment, "verify-gaussian");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.format, io::Format::Csv);
  const auto points = cfg::expand_grid(c);
  EXPECT_EQ(points.size(), 6u);
  EXPECT_EQ(cfg::setting_number(c, "n_cycles"), 20000.0);
}

TEST(Config, GridExpansionOrder) {
  const auto c = cfg::parse_config(
      "experiment: verify-gaussian\n"
      "seed: 99\n"
      "grid:\n"
      "  F0: 4\n"
      "  D: [0, 0.05]\n"
      "  zeta: [-0.5, 0.0, 0.5]\n");
  EXPECT_EQ(c.seed, 99u);
  const auto pts = cfg::expand_grid(c);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0].number("D"), 0.0);
  EXPECT_EQ(pts[0].number("zeta"), -0.5);
  EXPECT_EQ(pts[1].number("zeta"), 0.0);
  EXPECT_EQ(pts[3].number("D"), 0.05);
  EXPECT_EQ(pts[5].index, 5u);
}

TEST(Config, JsonAccepted) {
  const auto c = cfg::parse_config(R"({"experiment": "optimize", "grid": {"A": [0.25]}, "format": "json"})");
  EXPECT_EQ(c.experiment, "optimize");
  EXPECT_EQ(c.format, io::Format::Json);
}

TEST(Config, UnitZetaRejectedWithLine) {
  const auto msg = error_of(
      "experiment: simulate\n"
      "grid:\n"
      "  zeta: [0.0, 1.0]\n");
  EXPECT_NE(msg.find("test.yaml:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("grid.zeta"), std::string::npos) << msg;
  EXPECT_NE(error_of("experiment: simulate\ngrid:\n  zeta: -1\n"), "");
}

TEST(Config, FieldLevelErrors) {
  EXPECT_NE(error_of("experiment: nope\n").find("test.yaml:1"), std::string::npos);
  EXPECT_NE(error_of("experiment: simulate\nbogus: 1\n").find("bogus"), std::string::npos);
  const auto unknown = error_of("experiment: simulate\ngrid:\n  F0: 4\n  Fzero: 4\n");
  EXPECT_NE(unknown.find("test.yaml:4"), std::string::npos) << unknown;
  const auto text = error_of("experiment: simulate\ngrid:\n  T: abc\n");
  EXPECT_NE(text.find("grid.T"), std::string::npos) << text;
  EXPECT_NE(error_of("experiment: simulate\ngrid:\n  T: -1\n"), "");
  EXPECT_NE(error_of("experiment: simulate\nsettings:\n  n_cycles: 1.5\n"), "");
  EXPECT_NE(error_of("experiment: simulate\nformat: xml\n"), "");
  EXPECT_NE(error_of("experiment: simulate\ngrid:\n  noise: [pink]\n"), "");
  EXPECT_NE(error_of("experiment: [unclosed\n"), "");
  EXPECT_NE(error_of("seed: 3\n").find("experiment"), std::string::npos);
  EXPECT_THROW(cfg::load_config("/nonexistent/config.yaml"), aclock::InputError);
}

TEST(Config, SchemasCoverAllExperiments) {
  for (const char* name :
       {"simulate", "verify-gaussian", "bounds", "optimize", "allan", "estimation-bounds", "qfi"}) {
    EXPECT_EQ(cfg::schema(name).name, name);
  }
  EXPECT_THROW(cfg::schema("other"), aclock::InputError);
}

TEST(ReportIo, FormatDouble) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(-0.0), "0");
  EXPECT_EQ(io::format_double(std::numeric_limits<double>::quiet_NaN()), "NA");
  EXPECT_EQ(io::format_double(std::numeric_limits<double>::infinity()), "inf");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(io::format_double(x)), x);
}

TEST(ReportIo, HeaderOnlyCsv) {
  io::Table t;
  t.columns = {"a", "b"};
  EXPECT_EQ(io::to_csv(t), "a,b\n");
}

TEST(ReportIo, OneRecordCsv) {
  io::Table t;
  t.columns = {"x", "name", "ok", "n", "missing"};
  t.add_row({0.25, std::string("a,b"), true, std::int64_t{3}, std::monostate{}});
  EXPECT_EQ(io::to_csv(t), "x,name,ok,n,missing\n0.25,\"a,b\",true,3,NA\n");
  EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
}

TEST(ReportIo, JsonHasSchemaVersion) {
  io::Table t;
  t.columns = {"x", "y"};
  t.add_row({1.5, std::numeric_limits<double>::quiet_NaN()});
  const auto doc = nlohmann::json::parse(io::to_json(t, {"bounds", 7}));
  EXPECT_EQ(doc["schema_version"], io::kSchemaVersion);
  EXPECT_EQ(doc["experiment"], "bounds");
  EXPECT_EQ(doc["seed"], 7);
  ASSERT_EQ(doc["records"].size(), 1u);
  EXPECT_EQ(doc["records"][0]["x"], 1.5);
  EXPECT_TRUE(doc["records"][0]["y"].is_null());
}

TEST(ReportIo, UnwritablePath) {
  io::Table t;
  t.columns = {"a"};
  EXPECT_THROW(io::emit_file(t, io::Format::Csv, {"x", 1}, "/nonexistent/dir/out.csv"),
               aclock::InputError);
}
