#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rssi {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

// Whole-string parses; leading/trailing blanks are rejected. Throw ValueError.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

}  // namespace rssi
