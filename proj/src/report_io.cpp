#include "aclock/report_io.hpp"

#include "aclock/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aclock::io {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_text(const Cell& c) {
  return std::visit(Overloaded{
                        [](std::monostate) { return std::string("NA"); },
                        [](double x) { return format_double(x); },
                        [](std::int64_t x) { return std::to_string(x); },
                        [](const std::string& s) { return csv_field(s); },
                        [](bool b) { return std::string(b ? "true" : "false"); },
                    },
                    c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit(Overloaded{
                        [](std::monostate) { return nlohmann::ordered_json(nullptr); },
                        [](double x) {
                          if (std::isnan(x)) {
                            return nlohmann::ordered_json(nullptr);
                          }
                          if (std::isinf(x)) {
                            return nlohmann::ordered_json(format_double(x));
                          }
                          return nlohmann::ordered_json(x);
                        },
                        [](std::int64_t x) { return nlohmann::ordered_json(x); },
                        [](const std::string& s) { return nlohmann::ordered_json(s); },
                        [](bool b) { return nlohmann::ordered_json(b); },
                    },
                    c);
}

} // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells for " +
                                std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

Format parse_format(std::string_view name) {
  if (name == "csv") {
    return Format::Csv;
  }
  if (name == "json") {
    return Format::Json;
  }
  throw InputError("unknown output format '" + std::string(name) + "' (expected csv or json)");
}

std::string format_double(double x) {
  if (std::isnan(x)) {
    return "NA";
  }
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  if (x == 0.0) {
    return "0";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out += (i ? "," : "") + csv_field(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += (i ? "," : "") + cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& table, const Metadata& meta) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["experiment"] = meta.experiment;
  doc["seed"] = meta.seed;
  doc["columns"] = table.columns;
  auto records = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json rec = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      rec[table.columns[i]] = cell_json(row[i]);
    }
    records.push_back(std::move(rec));
  }
  doc["records"] = std::move(records);
  return doc.dump(2) + "\n";
}

void emit(const Table& table, Format format, const Metadata& meta, std::ostream& out) {
  out << (format == Format::Csv ? to_csv(table) : to_json(table, meta));
}

void emit_file(const Table& table, Format format, const Metadata& meta, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw InputError("cannot open output file '" + path + "' for writing");
  }
  emit(table, format, meta, f);
  f.flush();
  if (!f) {
    throw InputError("failed writing output file '" + path + "'");
  }
}

} // namespace aclock::io
