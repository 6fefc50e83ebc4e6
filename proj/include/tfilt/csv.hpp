#pragma once

// CSV output shared by every experiment command. Header row, '.' decimal
// separator, doubles at 17 significant digits so a parse-back reproduces the
// exact bits.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace tfilt::csv {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double x);  // %.17g

/// Serialize with CRLF-free line endings ('\n'); fields quoted only when they
/// contain a comma, quote or newline.
std::string to_string(const Table& t);

void write_file(const std::string& path, const Table& t);

/// Minimal reader for round-trip tests: splits fields, no type recovery.
std::vector<std::vector<std::string>> parse(const std::string& text);

}  // namespace tfilt::csv
