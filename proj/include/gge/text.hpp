#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gge::text {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
// Fixed-point with the given number of decimals, for human-readable tables.
std::string format_fixed(double v, int decimals);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Whitespace-separated doubles; nullopt if any token is not a number.
std::optional<std::vector<double>> parse_doubles(std::string_view s);
std::string join_doubles(const std::vector<double>& values, char sep = ' ');

std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);

// Pads every column to its widest cell.
std::string aligned_table(const std::vector<std::vector<std::string>>& rows);

}  // namespace gge::text
