#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace gcmc {

// Exact arbitrary-precision rational. All symbolic computation in the
// moment calculus and certificate verification uses this type; floats
// never enter those paths.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Parses "p", "-p", or "p/q". Throws ParseError on malformed input.
Rational parse_rational(const std::string& text);

// "p" when the denominator is 1, otherwise "p/q".
std::string rational_str(const Rational& r);

// Exact conversion of the binary double value (no rounding).
Rational rational_from_double(double x);

// Best rational approximation with denominator <= max_denominator,
// computed from the continued-fraction expansion (convergents and the
// final semiconvergent). Exact round-trip when x is such a rational.
// Throws InvalidArgument for non-finite x or max_denominator == 0.
Rational rationalize(double x, std::uint64_t max_denominator);

}  // namespace gcmc
