#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace effbench {

struct CsvOptions {
  /// Numbers use ',' as decimal separator; fields are then split on ';'.
  bool decimal_comma = false;
};

/// A header row plus string cells. Every row has header.size() cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws SchemaMismatch when absent.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const CsvOptions& options = {});
CsvTable read_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Comma-separated, '.' decimals, fields quoted only when needed.
std::string to_csv(const CsvTable& table);

/// Parses a numeric cell; throws SchemaMismatch naming `context` on failure.
double parse_number(std::string_view cell, bool decimal_comma, std::string_view context = {});

/// Shortest representation that round-trips exactly.
std::string format_full(double value);
/// Fixed notation with the given number of decimals.
std::string format_fixed(double value, int decimals);

}  // namespace effbench
