#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace enrichkit {

/// Split into lines on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

/// Whitespace-separated tokens (spaces and tabs).
std::vector<std::string_view> split_ws(std::string_view line);

/// %.6g-style rendering used in report tables.
std::string format_sig(double v, int digits = 6);

/// Shortest representation that round-trips the exact double.
std::string format_full(double v);

double parse_double(std::string_view token);  // throws on garbage or non-finite
long long parse_int(std::string_view token);

}  // namespace enrichkit
