#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gaussian_oracle.hpp"
#include "gcmc/errors.hpp"
#include "gcmc/moments.hpp"

using namespace gcmc;
using gcmc_test::gaussian_moment_exact;

namespace {

MomentExpr random_expr(std::mt19937_64& rng, int max_terms, int max_weight) {
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_int_distribution<int> weight_dist(0, max_weight);
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 5);
  MomentExpr e;
  int n = nterms(rng);
  for (int k = 0; k < n; ++k) {
    int w = weight_dist(rng);
    auto monos = monomials_of_weight(w);
    std::uniform_int_distribution<std::size_t> pick(0, monos.size() - 1);
    e.add_term(monos[pick(rng)], make_rational(num(rng), den(rng)));
  }
  return e;
}

}  // namespace

TEST_CASE("monomial ordering and basics") {
  auto r1 = MomentMonomial::ratio(1);
  auto r2 = MomentMonomial::ratio(2);
  auto r1_4 = MomentMonomial::ratio(1, 4);
  auto r2_2 = MomentMonomial::ratio(2, 2);

  CHECK(MomentMonomial().is_one());
  CHECK(MomentMonomial().weight() == 0);
  CHECK(r2_2.weight() == 4);
  CHECK(r1_4.weight() == 4);
  CHECK(r2_2.degree() == 2);
  CHECK(r2_2 > r1_4);  // higher index wins within a weight
  CHECK(r1.times(r2).str() == "r2*r1");
  CHECK(r2_2.even_exponents());
  CHECK(!r1.times(r2).even_exponents());
  CHECK(r1_4.divide_ratio(1).str() == "r1^3");

  CHECK(monomials_of_weight(0).size() == 1);
  CHECK(monomials_of_weight(4).size() == 5);   // partitions of 4
  CHECK(monomials_of_weight(6).size() == 11);  // partitions of 6
}

TEST_CASE("derive_y matches the chain rule examples") {
  MomentExpr r1 = MomentExpr::term(1, MomentMonomial::ratio(1));
  CHECK(derive_y(r1).str() == "E[r2] - E[r1^2]");

  CHECK(derive_y(MomentExpr::one()).is_zero());

  MomentExpr r1sq = MomentExpr::term(1, MomentMonomial::ratio(1, 2));
  CHECK(derive_y(r1sq) == MomentExpr::parse("2*E[r2*r1] - 2*E[r1^3]"));

  // weight of every output monomial = input weight + 1
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    auto monos = monomials_of_weight(5);
    for (const auto& m : monos) {
      MomentExpr d = derive_y(MomentExpr::term(1, m));
      for (const auto& [mm, c] : d.terms()) CHECK(mm.weight() == 6);
    }
  }
}

TEST_CASE("derive_t matches the heat-flow examples") {
  MomentExpr r1sq = MomentExpr::term(1, MomentMonomial::ratio(1, 2));
  CHECK(derive_t(r1sq) == MomentExpr::parse("E[r3*r1] - 1/2*E[r2*r1^2]"));

  CHECK(derive_t(MomentExpr()).is_zero());

  // mass term only: E[1] -> (1/2)E[r2], which the IBP relations kill
  MomentExpr dt1 = derive_t(MomentExpr::one());
  CHECK(dt1 == MomentExpr::parse("1/2*E[r2]"));
  CHECK(ibp_reduce(dt1).is_zero());

  // weight raises by exactly 2, linearity
  for (const auto& m : monomials_of_weight(4)) {
    MomentExpr d = derive_t(MomentExpr::term(1, m));
    for (const auto& [mm, c] : d.terms()) CHECK(mm.weight() == 6);
  }
}

TEST_CASE("ibp_reduce frozen examples") {
  CHECK(ibp_reduce(MomentExpr::parse("E[r3]")).is_zero());
  CHECK(ibp_reduce(MomentExpr::parse("E[r2*r1^2]")) ==
        MomentExpr::parse("2/3*E[r1^4]"));

  // E[(r2 - r1^2)^2] reduces to -2 * d^2 h/dt^2
  MomentExpr sq = MomentExpr::parse("E[r2^2] - 2*E[r2*r1^2] + E[r1^4]");
  MomentExpr target = entropy_derivative(2);
  target *= -2;
  CHECK(ibp_reduce(sq) == target);
}

TEST_CASE("ibp_reduce is idempotent and linear") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 25; ++rep) {
    MomentExpr e1 = random_expr(rng, 6, 8);
    MomentExpr e2 = random_expr(rng, 6, 8);
    MomentExpr r1 = ibp_reduce(e1);
    CHECK(ibp_reduce(r1) == r1);

    Rational alpha = make_rational(2, 3), beta = make_rational(-5, 1);
    MomentExpr combo = alpha * e1 + beta * e2;
    CHECK(ibp_reduce(combo) == alpha * ibp_reduce(e1) + beta * ibp_reduce(e2));
  }
}

TEST_CASE("relations vanish exactly on Gaussians") {
  for (int w = 1; w <= 8; ++w) {
    const RelationBasis& basis = relation_basis(w);
    CHECK(basis.relations().size() == monomials_of_weight(w - 1).size());
    for (const auto& rel : basis.relations()) {
      for (Rational sigma : {make_rational(1), make_rational(2), make_rational(1, 2)}) {
        CHECK(gaussian_moment_exact(rel, sigma) == 0);
      }
    }
  }
}

TEST_CASE("reduction preserves the Gaussian functional exactly") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 30; ++rep) {
    MomentExpr e = random_expr(rng, 5, 8);
    MomentExpr r = ibp_reduce(e);
    for (Rational sigma : {make_rational(1), make_rational(3, 2)}) {
      CHECK(gaussian_moment_exact(e, sigma) == gaussian_moment_exact(r, sigma));
    }
  }
}

TEST_CASE("entropy derivatives: seeds and canonical forms") {
  CHECK(entropy_derivative(1).str() == "1/2*E[r1^2]");
  CHECK(entropy_derivative(2).str() == "-1/2*E[r2^2] + 1/6*E[r1^4]");
  CHECK(entropy_derivative(2) == MomentExpr::parse("-1/2*E[r2^2] + 1/6*E[r1^4]"));
}

TEST_CASE("entropy derivatives: Gaussian closed form, exact") {
  // d^n/dt^n (1/2) log 2 pi e (a+t) = (1/2)(-1)^{n-1}(n-1)!/s^n at s = a+t
  for (int n = 1; n <= 6; ++n) {
    MomentExpr e = entropy_derivative(n);
    for (Rational sigma : {make_rational(1), make_rational(2), make_rational(1, 2)}) {
      Rational s = sigma * sigma;
      Rational expected = make_rational(1, 2);
      for (int k = 1; k <= n - 1; ++k) expected *= k;
      if (n % 2 == 0) expected = -expected;
      for (int k = 0; k < n; ++k) expected /= s;
      CHECK(gaussian_moment_exact(e, sigma) == expected);
    }
  }
}

TEST_CASE("entropy derivatives: weight homogeneity up to the cap") {
  for (int n = 1; n <= kDerivativeCap; ++n) {
    MomentExpr e = entropy_derivative(n);
    CHECK(!e.is_zero());
    CHECK(e.homogeneous());
    CHECK(e.weight() == 2 * n);
  }
}

TEST_CASE("order cap is enforced and named") {
  CHECK_THROWS_WITH_AS(entropy_derivative(kDerivativeCap + 1),
                       doctest::Contains("cap is 8"), OrderCapError);
  CHECK_THROWS_AS(entropy_derivative(0), OrderCapError);
  CHECK_THROWS_AS(fisher_derivative(kDerivativeCap), OrderCapError);
  CHECK_THROWS_AS(fisher_derivative(-1), OrderCapError);
}

TEST_CASE("fisher derivatives") {
  CHECK(fisher_derivative(0).str() == "E[r1^2]");
  MomentExpr twice = entropy_derivative(2);
  twice *= 2;
  CHECK(fisher_derivative(1) == twice);

  // d^2/dt^2 of 1/(a+t) is 2/s^3
  Rational sigma = make_rational(1);
  CHECK(gaussian_moment_exact(fisher_derivative(2), sigma) == make_rational(2));
  // alternating CM pattern (-1)^n n! / s^{n+1} at s = 1
  for (int n = 0; n <= 6; ++n) {
    Rational expected = 1;
    for (int k = 1; k <= n; ++k) expected *= k;
    if (n % 2 == 1) expected = -expected;
    CHECK(gaussian_moment_exact(fisher_derivative(n), sigma) == expected);
  }
}

TEST_CASE("serialization round trip") {
  std::mt19937_64 rng(1234);
  for (int rep = 0; rep < 40; ++rep) {
    MomentExpr e = random_expr(rng, 7, 9);
    CHECK(MomentExpr::parse(e.str()) == e);
  }
  CHECK(MomentExpr::parse("0").is_zero());
  CHECK(MomentExpr().str() == "0");

  // display order: within a weight the higher derivative index prints first
  CHECK(MomentExpr::parse("1/6*E[r1^4] - 1/2*E[r2^2]").str() ==
        "-1/2*E[r2^2] + 1/6*E[r1^4]");

  CHECK_THROWS_AS(MomentExpr::parse("E[r0]"), Error);
  CHECK_THROWS_AS(MomentExpr::parse("garbage"), ParseError);
  CHECK_THROWS_AS(MomentExpr::parse(""), ParseError);
}

TEST_CASE("paper notation rendering") {
  CHECK(entropy_derivative(2).paper_str() ==
        "-1/2*int f2^2/f dy + 1/6*int f1^4/f^3 dy");
  CHECK(MomentExpr::one().paper_str() == "int f dy");
  CHECK(MomentExpr::parse("E[r2]").paper_str() == "int f2 dy");
}

TEST_CASE("rationalize: continued-fraction best approximation") {
  CHECK(rationalize(0.333333333, 1000000) == make_rational(1, 3));
  CHECK(rationalize(13.0 / 70000.0, 1000000) == make_rational(13, 70000));
  CHECK(rationalize(0.0, 10) == 0);
  CHECK(rationalize(-0.5, 10) == make_rational(-1, 2));
  CHECK(rationalize(3.14159265358979, 1) == 3);
  CHECK_THROWS_AS(rationalize(std::numeric_limits<double>::infinity(), 10),
                  InvalidArgument);
  CHECK_THROWS_AS(rationalize(std::numeric_limits<double>::quiet_NaN(), 10),
                  InvalidArgument);

  // exact round trip for representable rationals within the bound
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> num(-999, 999);
  std::uniform_int_distribution<int> den(1, 997);
  for (int rep = 0; rep < 200; ++rep) {
    Rational r = make_rational(num(rng), den(rng));
    double x = r.get_d();
    CHECK(rationalize(x, 1000) == r);
  }
}
