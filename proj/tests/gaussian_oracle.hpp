#pragma once

// Test-only exact oracle: moment functionals E_f[.] of a centered
// Gaussian N(0, sigma^2) evaluated in closed form over the rationals.
// For z ~ N(0,1), r_i = (-1/sigma)^i He_i(z), so
//   E_f[prod r_i^{a_i}] = (-1)^w sigma^{-w} E_z[prod He_i(z)^{a_i}],
// and the Hermite product expands into monomials with E_z[z^k] given by
// double factorials. Entirely independent of derive_*/ibp_reduce.

#include <vector>

#include "gcmc/moments.hpp"
#include "gcmc/rational.hpp"

namespace gcmc_test {

using gcmc::MomentExpr;
using gcmc::Rational;

inline std::vector<mpz_class> hermite_coeffs(int n) {
  // probabilists' He_n as coefficients by ascending power of z
  std::vector<std::vector<mpz_class>> he(n + 1);
  he[0] = {1};
  if (n >= 1) he[1] = {0, 1};
  for (int k = 1; k < n; ++k) {
    std::vector<mpz_class> next(k + 2, mpz_class(0));
    for (std::size_t j = 0; j < he[k].size(); ++j) next[j + 1] += he[k][j];
    for (std::size_t j = 0; j < he[k - 1].size(); ++j) next[j] -= k * he[k - 1][j];
    he[k + 1] = std::move(next);
  }
  return he[n];
}

inline mpz_class double_factorial(int k) {
  mpz_class r = 1;
  for (int i = k; i >= 2; i -= 2) r *= i;
  return r;
}

// E_z[z^k] for z ~ N(0,1)
inline mpz_class standard_normal_moment(int k) {
  if (k % 2 == 1) return 0;
  return double_factorial(k - 1);
}

inline mpz_class hermite_product_moment(const gcmc::MomentMonomial& m) {
  std::vector<mpz_class> poly = {1};
  for (int i = 1; i <= m.max_index(); ++i) {
    std::vector<mpz_class> he = hermite_coeffs(i);
    for (int rep = 0; rep < m.exponent(i); ++rep) {
      std::vector<mpz_class> out(poly.size() + he.size() - 1, mpz_class(0));
      for (std::size_t a = 0; a < poly.size(); ++a)
        for (std::size_t b = 0; b < he.size(); ++b) out[a + b] += poly[a] * he[b];
      poly = std::move(out);
    }
  }
  mpz_class acc = 0;
  for (std::size_t k = 0; k < poly.size(); ++k)
    acc += poly[k] * standard_normal_moment(static_cast<int>(k));
  return acc;
}

// Exact E_f[e] for f = N(0, sigma^2) with rational sigma.
inline Rational gaussian_moment_exact(const MomentExpr& e, const Rational& sigma) {
  Rational total = 0;
  for (const auto& [m, c] : e.terms()) {
    int w = m.weight();
    Rational scale = 1;
    for (int i = 0; i < w; ++i) scale /= sigma;
    if (w % 2 == 1) scale = -scale;
    total += c * scale * Rational(hermite_product_moment(m));
  }
  return total;
}

}  // namespace gcmc_test
