#include "gcmc/rational.hpp"

#include <cmath>

#include "gcmc/errors.hpp"

namespace gcmc {

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ParseError("empty rational literal");
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) throw ParseError("malformed rational literal: " + text);
  bool seen_slash = false;
  for (; i < s.size(); ++i) {
    if (s[i] == '/' && !seen_slash && i + 1 < s.size()) {
      seen_slash = true;
      continue;
    }
    if (!isdigit(static_cast<unsigned char>(s[i])))
      throw ParseError("malformed rational literal: " + text);
  }
  Rational r;
  if (r.set_str(s, 10) != 0) throw ParseError("malformed rational literal: " + text);
  if (r.get_den() == 0) throw ParseError("zero denominator: " + text);
  r.canonicalize();
  return r;
}

std::string rational_str(const Rational& r) {
  return r.get_str();
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("non-finite value has no rational form");
  Rational r(x);
  r.canonicalize();
  return r;
}

Rational rationalize(double x, std::uint64_t max_denominator) {
  if (!std::isfinite(x)) throw InvalidArgument("cannot rationalize a non-finite value");
  if (max_denominator == 0) throw InvalidArgument("max_denominator must be >= 1");

  const bool negative = x < 0;
  Rational target = rational_from_double(negative ? -x : x);
  const mpz_class bound(static_cast<unsigned long>(max_denominator));

  // Continued-fraction convergents h_k/k_k of |x|; stop before the
  // denominator bound is exceeded, then test the best semiconvergent.
  mpz_class h0 = 0, k0 = 1, h1 = 1, k1 = 0;
  mpz_class num = target.get_num(), den = target.get_den();
  while (den != 0) {
    mpz_class a = num / den;
    mpz_class h2 = a * h1 + h0;
    mpz_class k2 = a * k1 + k0;
    if (k2 > bound) break;
    h0 = h1; k0 = k1; h1 = h2; k1 = k2;
    mpz_class rem = num - a * den;
    num = den;
    den = rem;
  }

  Rational best(h1, k1 == 0 ? mpz_class(1) : k1);
  best.canonicalize();
  if (den != 0 && k1 != 0) {
    // Largest semiconvergent within the bound.
    mpz_class t = (bound - k0) / k1;
    if (t > 0) {
      Rational semi(t * h1 + h0, t * k1 + k0);
      semi.canonicalize();
      if (abs(semi - target) < abs(best - target)) best = semi;
    }
  }
  if (negative) best = -best;
  return best;
}

}  // namespace gcmc
