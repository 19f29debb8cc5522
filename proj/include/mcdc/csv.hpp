#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mcdc::csv {

/// A parsed comma-separated file: plain fields, no quoting, first line is the
/// header.  Blank lines are ignored.  `line_numbers[r]` is the 1-based source
/// line of `rows[r]`, for error messages.
struct Table {
  std::string name;  ///< file path or stream label, used in error messages
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

Table parse(std::istream& in, const std::string& name);
Table read_file(const std::string& path);

/// Index of the named header column.
std::optional<std::size_t> find_column(const Table& table, const std::string& name);

/// Parses rows[row][col] as a double; errors carry the file, line and column
/// name.
double parse_number(const Table& table, std::size_t row, std::size_t col);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace mcdc::csv
