#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace rocch {

// Exact rational on 64-bit integers. Always reduced, den > 0.
// Comparisons never touch floating point; doubles appear only when a
// caller asks for value().
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Rational() = default;

    static Rational make(std::int64_t n, std::int64_t d) {
        if (d == 0) throw std::invalid_argument("rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
        Rational r;
        r.num = g ? n / g : n;
        r.den = g ? d / g : d;
        return r;
    }

    // Exact dyadic expansion of a finite double. Every double is M*2^e with
    // integer M; both sides must fit in int64, which holds for every value
    // this library meets (probabilities, rates, small constants).
    static Rational from_double(double v) {
        if (!std::isfinite(v)) throw std::invalid_argument("rational: non-finite double");
        if (v == 0.0) return Rational{};
        int exp = 0;
        const double m = std::frexp(v, &exp);
        auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
        exp -= 53;
        while (mant != 0 && (mant & 1) == 0) { mant >>= 1; ++exp; }
        Rational r;
        if (exp >= 0) {
            if (exp > 9) throw std::invalid_argument("rational: double too large");
            r.num = mant << exp;
            r.den = 1;
        } else {
            if (exp < -62) throw std::invalid_argument("rational: double too fine");
            r.num = mant;
            r.den = std::int64_t{1} << -exp;
        }
        return r;
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Three-way compare; products of reduced int64 rationals fit __int128.
inline int compare(const Rational& a, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num) * b.den;
    const __int128 rhs = static_cast<__int128>(b.num) * a.den;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
inline bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
inline bool operator<(const Rational& a, const Rational& b) { return compare(a, b) < 0; }
inline bool operator<=(const Rational& a, const Rational& b) { return compare(a, b) <= 0; }
inline bool operator>(const Rational& a, const Rational& b) { return compare(a, b) > 0; }
inline bool operator>=(const Rational& a, const Rational& b) { return compare(a, b) >= 0; }

}  // namespace rocch
