#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <sstream>
#include <stdexcept>
#include <string>

namespace convlab {

using big_int = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;

/// Parses "p/q", a decimal like "0.1" (read exactly as 1/10), or a plain
/// integer; used for priors, thresholds, and p-grids so no floating-point
/// rounding enters the exact-arithmetic core.
namespace detail {

/// Decimal-only integer parsing. cpp_int's string constructor reads a
/// leading zero as an octal prefix, which would reject "08" (from "0.8").
inline big_int parse_decimal_int(const std::string& text) {
    bool neg = !text.empty() && text[0] == '-';
    std::string mag = neg ? text.substr(1) : text;
    if (mag.empty()) throw std::invalid_argument("empty integer");
    for (char c : mag)
        if (c < '0' || c > '9') throw std::invalid_argument("not a digit");
    auto first = mag.find_first_not_of('0');
    mag = first == std::string::npos ? "0" : mag.substr(first);
    big_int v(mag);
    return neg ? -v : v;
}

} // namespace detail

inline rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            auto dot = text.find('.');
            if (dot != std::string::npos) {
                big_int num = detail::parse_decimal_int(text.substr(0, dot) + text.substr(dot + 1));
                big_int den = 1;
                for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
                return rational(num, den);
            }
            return rational(detail::parse_decimal_int(text));
        }
        big_int num = detail::parse_decimal_int(text.substr(0, slash));
        big_int den = detail::parse_decimal_int(text.substr(slash + 1));
        if (den == 0)
            throw std::invalid_argument("zero denominator");
        return rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a rational: '" + text + "'");
    }
}

inline std::string to_string(const rational& r) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(r);
    if (boost::multiprecision::denominator(r) != 1)
        os << '/' << boost::multiprecision::denominator(r);
    return os.str();
}

/// Fixed-width decimal rendering (round toward zero); deterministic across
/// platforms, unlike printing a long double.
inline std::string to_decimal(const rational& r, int digits = 9) {
    big_int num = boost::multiprecision::numerator(r);
    big_int den = boost::multiprecision::denominator(r);
    std::string sign = num < 0 ? "-" : "";
    if (num < 0) num = -num;
    big_int whole = num / den;
    big_int rem = num % den;
    std::string frac;
    for (int i = 0; i < digits; ++i) {
        rem *= 10;
        frac += static_cast<char>('0' + static_cast<int>(rem / den));
        rem %= den;
    }
    return sign + whole.str() + "." + frac;
}

} // namespace convlab
