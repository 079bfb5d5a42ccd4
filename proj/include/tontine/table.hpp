#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tontine {

/// Empty cell (written as an empty CSV field).
struct Null {};

using Cell = std::variant<Null, double, std::int64_t, std::string>;

/// Long-format table with `# key=value` metadata lines ahead of the header.
struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

void write_csv(std::ostream& os, const Table& table);
std::string to_csv(const Table& table);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace tontine
