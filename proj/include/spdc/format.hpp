#pragma once

#include <string>
#include <string_view>

namespace spdc {

// Locale-independent decimal text with the given number of significant digits.
std::string format_number(double value, int significant_digits = 9);
// Fixed-point text with the given number of decimals.
std::string format_fixed(double value, int decimals);
// Shortest text that parses back to the identical double.
std::string format_exact(double value);
// Locale-independent parse of the whole string; throws parse errors.
double parse_number(std::string_view text);

}  // namespace spdc
