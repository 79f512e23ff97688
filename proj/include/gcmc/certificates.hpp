#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcmc/moments.hpp"

namespace gcmc {

struct SquareTerm {
  Rational coeff;   // >= 0
  MomentExpr poly;  // homogeneous of weight `order`
};

struct RemainderTerm {
  Rational coeff;        // >= 0
  MomentMonomial monomial;  // weight 2*order, all exponents even
};

// sign * (sum_j c_j E[(square_j)^2] + sum_l d_l E[remainder_l]); the
// squared polynomials and even-exponent remainders make the integrand
// pointwise sign-definite, so a certificate that reduces to the n-th
// entropy derivative certifies its sign.
class SOSCertificate {
 public:
  SOSCertificate(int order, int sign, std::vector<SquareTerm> squares,
                 std::vector<RemainderTerm> remainders);

  int order() const { return order_; }
  int sign() const { return sign_; }
  const std::vector<SquareTerm>& squares() const { return squares_; }
  const std::vector<RemainderTerm>& remainders() const { return remainders_; }

  // Throws CertificateError naming the offending term.
  void validate() const;

  std::string str() const;
  std::string paper_str() const;
  static SOSCertificate parse(const std::string& text);

  // "paper-n2", "paper-n3", "paper-n4": the published certificates.
  static SOSCertificate builtin(const std::string& name);
  static std::vector<std::string> builtin_names();

 private:
  int order_;
  int sign_;
  std::vector<SquareTerm> squares_;
  std::vector<RemainderTerm> remainders_;
};

// Expands squares and remainders into moment monomials and returns the
// IBP-reduced canonical form (including the sign).
MomentExpr expand_certificate(const SOSCertificate& c);

struct VerifyReport {
  bool verified = false;
  MomentExpr residual;     // canonical form of expansion - target
  Rational residual_l1{0};

  std::string str() const;
};

// Exact check: expand_certificate(c) - entropy_derivative(c.order())
// reduces to the zero expression. No tolerance anywhere.
VerifyReport verify_certificate(const SOSCertificate& c);

struct SearchConfig {
  int order = 3;
  int max_iterations = 100000;
  double step_size = 0.02;      // initial step; halved on non-decrease
  std::uint64_t seed = 0;
  std::uint64_t max_denominator = 1000000;  // rationalization bound
  double residual_tolerance = 1e-9;         // float L2 residual target
  // 0 = auto: the published certificate count for the order plus one
  // slack square (full basis count for unexplored orders).
  int num_squares = 0;

  void validate() const;
};

struct SearchOutcome {
  bool found = false;
  std::optional<SOSCertificate> certificate;  // set when found
  bool exact_verified = false;
  double float_residual = 0.0;  // best L2 residual of the float phase
  int iterations = 0;
  std::uint64_t denominator_used = 0;
  std::string note;
};

// Projected gradient descent over square-polynomial coefficients and
// remainder weights in the canonical-coordinate space, followed by
// rationalization, an exact affine re-projection of the Gram matrix onto
// the target coordinates, and an exact LDL^T split back into squares and
// remainders. Deterministic for a fixed config (including seed).
SearchOutcome search_certificate(const SearchConfig& cfg);

}  // namespace gcmc
