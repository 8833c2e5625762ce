#pragma once

// Minimal CSV helpers shared by the table readers. Fields never contain
// commas or quotes in any of the formats this library reads.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genet::csv {

struct Line {
  int number = 0;  // 1-based
  std::string_view text;
};

/// Splits on '\n', strips a trailing '\r', drops blank lines.
std::vector<Line> lines(std::string_view text);

std::vector<std::string_view> fields(std::string_view line);

std::string_view trim(std::string_view text);

std::optional<long long> to_int(std::string_view text);
std::optional<double> to_double(std::string_view text);

}  // namespace genet::csv
