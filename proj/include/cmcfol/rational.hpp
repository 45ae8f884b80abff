#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace cmcfol {

/// Exact coefficient type for the oracle/validation paths. Conversion to
/// double is one-way; solver paths never feed floats back into rationals.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.template convert_to<double>(); }
inline double to_double(double x) { return x; }

/// Exact: every finite double is a dyadic rational.
inline Rational rational_from_double(double x) { return Rational(x); }

inline Rational make_ratio(long long num, long long den) {
    return Rational(num) / Rational(den);
}

}  // namespace cmcfol
