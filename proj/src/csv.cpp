#include "mcdc/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "mcdc/error.hpp"

namespace mcdc::csv {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

Table parse(std::istream& in, const std::string& name) {
  Table table;
  table.name = name;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw ValidationError(cat(name, " line ", lineno, ": expected ",
                                table.header.size(), " fields, got ", fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(lineno);
  }
  if (table.header.empty())
    throw ValidationError(cat(name, ": empty file, expected a header line"));
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(cat("cannot open file '", path, "'"));
  return parse(in, path);
}

std::optional<std::size_t> find_column(const Table& table, const std::string& name) {
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c] == name) return c;
  return std::nullopt;
}

double parse_number(const Table& table, std::size_t row, std::size_t col) {
  const std::string& cell = table.rows[row][col];
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ValidationError(cat(table.name, " line ", table.line_numbers[row],
                              ", column '", table.header[col], "': cannot parse '",
                              cell, "' as a number"));
  return value;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (c) out << ',';
    out << cells[c];
  }
  out << '\n';
}

}  // namespace mcdc::csv
