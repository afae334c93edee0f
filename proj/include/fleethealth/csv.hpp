#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fleethealth::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of `name` in the header, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

// Reads an RFC 4180-style file (double-quoted fields may contain commas,
// quotes are escaped by doubling). Every row must match the header width.
Table read(const std::filesystem::path& path);
Table parse(std::istream& in, const std::string& source_name = "<stream>");

void write(const std::filesystem::path& path, const Table& table);
void write(std::ostream& out, const Table& table);

// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);
std::optional<double> parse_number(std::string_view text);

}  // namespace fleethealth::csv
