#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "lfgeo/error.hpp"

namespace lfgeo {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

inline Integer numerator_of(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Integer denominator_of(const Rational& r) { return boost::multiprecision::denominator(r); }

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
    if (den == 0) throw StructuralError("rational with zero denominator");
    return Rational(Integer(num), Integer(den));
}

inline std::string to_string(const Rational& r) {
    return r.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Closest rational to `value` with denominator at most `max_den` (continued fractions).
inline Rational best_rational(double value, std::int64_t max_den = 1'000'000'000) {
    if (!std::isfinite(value)) throw PreconditionError("cannot rationalize a non-finite value");
    if (max_den < 1) throw PreconditionError("max_den must be positive");
    const bool negative = value < 0;
    Rational target(std::fabs(value));  // exact binary value of the double
    // Stern-Brocot walk via continued fraction terms of the exact target.
    Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    Rational x = target;
    const Integer bound = max_den;
    while (true) {
        Integer a = numerator_of(x) / denominator_of(x);
        Integer q2 = q0 + a * q1;
        if (q2 > bound) {
            // Best semiconvergent between (p0,q0) and (p1,q1).
            Integer k = (bound - q0) / q1;
            Rational lower(p0 + k * p1, q0 + k * q1);
            Rational upper(p1, q1);
            Rational dl = abs(lower - target), du = abs(upper - target);
            Rational best = (dl < du) ? lower : upper;
            return negative ? Rational(-best) : best;
        }
        Integer p2 = p0 + a * p1;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        Rational frac = x - Rational(a);
        if (frac == 0) break;
        x = 1 / frac;
    }
    Rational r(p1, q1);
    return negative ? Rational(-r) : r;
}

/// Least common multiple of all denominators.
inline Integer common_denominator(const std::vector<Rational>& values) {
    Integer l = 1;
    for (const auto& v : values) l = boost::multiprecision::lcm(l, denominator_of(v));
    return l;
}

/// Scales a vector by a positive factor so that all entries are integers with gcd 1.
/// The zero vector is returned unchanged.
inline std::vector<Rational> primitive_integer_vector(const std::vector<Rational>& values) {
    Integer l = common_denominator(values);
    Integer g = 0;
    for (const auto& v : values) g = boost::multiprecision::gcd(g, Integer(numerator_of(v) * (l / denominator_of(v))));
    if (g == 0) return values;
    std::vector<Rational> out;
    out.reserve(values.size());
    for (const auto& v : values) out.emplace_back(Integer(numerator_of(v) * (l / denominator_of(v)) / g));
    return out;
}

/// Decimal rendering with a fixed number of fractional digits (rounded half away from zero).
inline std::string to_decimal_string(const Rational& r, int digits = 12) {
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(digits));
    Rational scaled = abs(r) * Rational(scale);
    Integer n = numerator_of(scaled), d = denominator_of(scaled);
    Integer q = (2 * n + d) / (2 * d);
    std::string s = q.str();
    if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits + 1) - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    if (r < 0 && q != 0) s.insert(0, "-");
    return s;
}

}  // namespace lfgeo
