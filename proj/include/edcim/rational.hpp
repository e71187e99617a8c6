#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace edcim {

// Exact rational scalar used throughout the equation core and the solver.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// "3", "-3", "1/2" style rendering, always in lowest terms (cpp_rational
// keeps itself reduced).
inline std::string to_string(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) {
        s += "/";
        s += denominator(r).str();
    }
    return s;
}

// Exact conversion of an unsigned decimal literal ("27", "0.25", ".5", "3.").
// Signs are handled by the expression grammar, not here. Digits accumulate
// numerically: the cpp_int string constructor would read leading zeros as
// octal.
inline std::optional<Rational> rational_from_decimal(std::string_view text) {
    if (text.empty()) return std::nullopt;
    BigInt digits = 0;
    BigInt scale = 1;
    bool seen_dot = false, seen_digit = false;
    for (char ch : text) {
        if (ch == '.') {
            if (seen_dot) return std::nullopt;
            seen_dot = true;
        } else if (ch >= '0' && ch <= '9') {
            digits = digits * 10 + (ch - '0');
            seen_digit = true;
            if (seen_dot) scale *= 10;
        } else {
            return std::nullopt;
        }
    }
    if (!seen_digit) return std::nullopt;
    return Rational(digits, scale);
}

// Exact rational value of a finite double (mantissa * 2^exp expansion).
inline Rational rational_from_double(double value) {
    if (value == 0.0) return Rational(0);
    int exp = 0;
    double mantissa = std::frexp(value, &exp);
    auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
    exp -= 53;
    Rational r(scaled);
    if (exp >= 0) {
        r *= Rational(BigInt(1) << exp);
    } else {
        r /= Rational(BigInt(1) << -exp);
    }
    return r;
}

}  // namespace edcim
