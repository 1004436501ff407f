#include "spdc/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "spdc/error.hpp"

namespace spdc {

std::string format_number(double value, int significant_digits) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::general, significant_digits);
    if (ec != std::errc{}) throw Error(ErrorKind::io, "number formatting failed");
    return std::string(buf.data(), end);
}

std::string format_fixed(double value, int decimals) {
    if (!std::isfinite(value)) return format_number(value);
    std::array<char, 128> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::fixed, decimals);
    if (ec != std::errc{}) throw Error(ErrorKind::io, "number formatting failed");
    return std::string(buf.data(), end);
}

std::string format_exact(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw Error(ErrorKind::io, "number formatting failed");
    return std::string(buf.data(), end);
}

double parse_number(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorKind::parse, "not a number: '" + std::string(text) + "'");
    return value;
}

}  // namespace spdc
