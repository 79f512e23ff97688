#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "gcmc/rational.hpp"

namespace gcmc {

// Highest entropy-derivative order the symbolic calculus is built for.
// Order n lives at monomial weight 2n; the relation bases above weight
// 2*kDerivativeCap get expensive to triangularize.
inline constexpr int kDerivativeCap = 8;

// Monomial in the score ratios r_i = f_i / f, where f_i is the i-th
// spatial derivative of the density. Stored as the exponent of r_{k+1}
// at position k with trailing zeros trimmed, so the representation is
// unique and the empty vector is the constant 1.
class MomentMonomial {
 public:
  MomentMonomial() = default;

  // r_index^exp
  static MomentMonomial ratio(int index, int exp = 1);

  int exponent(int index) const;  // a_index, 0 when absent
  int max_index() const;          // 0 for the constant monomial
  int weight() const;             // sum i * a_i
  int degree() const;             // sum a_i
  bool is_one() const { return exps_.empty(); }
  bool even_exponents() const;

  MomentMonomial times(const MomentMonomial& other) const;
  MomentMonomial times_ratio(int index, int exp = 1) const;
  // Removes one power of r_index; requires exponent(index) >= 1.
  MomentMonomial divide_ratio(int index) const;

  // Graded order: weight first, then exponent vectors compared from the
  // highest derivative index downward. The elimination in ibp_reduce
  // removes the greatest monomial of a relation, i.e. the one carrying
  // the highest derivative index.
  std::strong_ordering operator<=>(const MomentMonomial& other) const;
  bool operator==(const MomentMonomial& other) const = default;

  // "1", "r2", "r2^2*r1^4" (highest index first)
  std::string str() const;

 private:
  std::vector<int> exps_;
};

// Finite linear combination sum_m c_m * E_f[m] with exact rational
// coefficients; zero coefficients are never stored. The same type also
// represents plain integrand polynomials in the r_i (inside certificate
// squares), where E[.] is not yet applied.
class MomentExpr {
 public:
  MomentExpr() = default;

  static MomentExpr term(const Rational& c, const MomentMonomial& m);
  static MomentExpr one();  // E[1]

  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const std::map<MomentMonomial, Rational>& terms() const { return terms_; }

  Rational coefficient(const MomentMonomial& m) const;
  void add_term(const MomentMonomial& m, const Rational& c);

  MomentExpr& operator+=(const MomentExpr& other);
  MomentExpr& operator-=(const MomentExpr& other);
  MomentExpr& operator*=(const Rational& c);
  friend MomentExpr operator+(MomentExpr a, const MomentExpr& b) { return a += b; }
  friend MomentExpr operator-(MomentExpr a, const MomentExpr& b) { return a -= b; }
  friend MomentExpr operator*(const Rational& c, MomentExpr e) { return e *= c; }
  bool operator==(const MomentExpr& other) const = default;

  // Integrand product (polynomial multiplication in the r_i).
  MomentExpr times(const MomentExpr& other) const;

  bool homogeneous() const;  // all monomials share one weight (or zero expr)
  int weight() const;        // weight of a homogeneous expression
  int max_index() const;     // highest r-index appearing anywhere
  Rational l1_norm() const;

  // Canonical text form, e.g. "-1/2*E[r2^2] + 1/6*E[r1^4]". Terms are
  // printed in descending monomial order.
  std::string str() const;
  // The f-notation used in the source material: E[r2^2] renders as
  // "f2^2/f" under an integral sign.
  std::string paper_str() const;

  static MomentExpr parse(const std::string& text);

 private:
  std::map<MomentMonomial, Rational> terms_;
};

// Polynomial in the r_i without E[.] wrappers, e.g. "r3 - r2*r1 + 1/3*r1^3".
MomentExpr parse_rho_polynomial(const std::string& text);

// Polynomial rendering without E[.] wrappers ("r3 - r2*r1 + 1/3*r1^3").
std::string rho_polynomial_str(const MomentExpr& e);

// All monomials of the given weight (partitions of `weight`), in
// ascending monomial order.
std::vector<MomentMonomial> monomials_of_weight(int weight);

// Spatial derivative of the integrand polynomial: r_i' = r_{i+1} - r_1 r_i.
// Raises every monomial weight by exactly 1.
MomentExpr derive_y(const MomentExpr& e);

// d/dt of the functional E_f[e] along heat flow (f_t = (1/2) f_yy):
// dE_f[m]/dt = E_f[(1/2) r_2 m + dm/dt] with dr_i/dt = (1/2)(r_{i+2} - r_i r_2).
// Raises every monomial weight by exactly 2.
MomentExpr derive_t(const MomentExpr& e);

// Integration-by-parts relations at one weight: E_f[derive_y(m) + r_1 m] = 0
// for every monomial m of weight w-1, triangularized to reduced row-echelon
// form over the rationals.
class RelationBasis {
 public:
  explicit RelationBasis(int weight);

  int weight() const { return weight_; }
  const std::vector<MomentExpr>& relations() const { return relations_; }
  // leading monomial -> expansion in standard monomials
  const std::map<MomentMonomial, MomentExpr>& elimination_table() const {
    return table_;
  }
  const std::vector<MomentMonomial>& standard_monomials() const {
    return standard_;
  }

 private:
  int weight_;
  std::vector<MomentExpr> relations_;
  std::map<MomentMonomial, MomentExpr> table_;
  std::vector<MomentMonomial> standard_;
};

// Shared, lazily built, thread-safe cache of relation bases.
const RelationBasis& relation_basis(int weight);

// Canonical normal form of e modulo the IBP relation basis of each
// weight. Idempotent, linear, E_f-preserving for every smooth rapidly
// decaying density.
MomentExpr ibp_reduce(const MomentExpr& e);

// Canonical moment expression for d^n h(Y_t)/dt^n; every monomial has
// weight exactly 2n. Seeded by de Bruijn's identity (n=1 gives
// (1/2)E[r1^2]) and iterated with derive_t + ibp_reduce. Results are
// cached. Throws OrderCapError when n < 1 or n > cap.
MomentExpr entropy_derivative(int n, int cap = kDerivativeCap);

// d^n I(Y_t)/dt^n: E[r1^2] for n=0, otherwise 2*entropy_derivative(n+1).
MomentExpr fisher_derivative(int n, int cap = kDerivativeCap);

// E_f-equivalent forms of the same derivatives left unreduced (the raw
// derive_t cascade). Their coefficients stay small where the canonical
// forms grow to ~1e8 by order 8, so these are the forms to evaluate
// numerically; ibp_reduce maps them onto the canonical ones.
MomentExpr entropy_derivative_raw(int n, int cap = kDerivativeCap);
MomentExpr fisher_derivative_raw(int n, int cap = kDerivativeCap);

}  // namespace gcmc
