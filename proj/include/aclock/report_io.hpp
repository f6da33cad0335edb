#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

/// Result tables and their CSV / JSON serialization.
namespace aclock::io {

/// monostate is "not applicable": NA in CSV, null in JSON. NaN doubles are
/// written the same way.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument if the row width differs from columns.
  void add_row(std::vector<Cell> row);
};

enum class Format { Csv, Json };

/// "csv" or "json"; throws InputError otherwise.
Format parse_format(std::string_view name);

inline constexpr int kSchemaVersion = 1;

struct Metadata {
  std::string experiment;
  std::uint64_t seed = 0;
};

/// Shortest decimal string that round-trips; "NA" for NaN, "inf"/"-inf".
std::string format_double(double x);

std::string to_csv(const Table& table);
/// {"schema_version", "experiment", "seed", "columns", "records": [{...}]}.
std::string to_json(const Table& table, const Metadata& meta);

void emit(const Table& table, Format format, const Metadata& meta, std::ostream& out);
/// Throws InputError naming the path if it cannot be written.
void emit_file(const Table& table, Format format, const Metadata& meta, const std::string& path);

} // namespace aclock::io
