#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gaussian_oracle.hpp"
#include "gcmc/certificates.hpp"
#include "gcmc/errors.hpp"

using namespace gcmc;
using gcmc_test::gaussian_moment_exact;

TEST_CASE("published certificates verify exactly") {
  for (const auto& name : SOSCertificate::builtin_names()) {
    SOSCertificate cert = SOSCertificate::builtin(name);
    VerifyReport rep = verify_certificate(cert);
    INFO(name, ": residual ", rep.residual.str());
    CHECK(rep.verified);
    CHECK(rep.residual_l1 == 0);
  }
}

TEST_CASE("signs follow the alternating pattern") {
  CHECK(SOSCertificate::builtin("paper-n2").sign() == -1);
  CHECK(SOSCertificate::builtin("paper-n3").sign() == +1);
  CHECK(SOSCertificate::builtin("paper-n4").sign() == -1);
}

TEST_CASE("expansion equals the canonical derivative") {
  SOSCertificate n2 = SOSCertificate::builtin("paper-n2");
  CHECK(expand_certificate(n2) == entropy_derivative(2));

  SOSCertificate n3 = SOSCertificate::builtin("paper-n3");
  CHECK(expand_certificate(n3) == entropy_derivative(3));

  // empty certificate expands to zero
  SOSCertificate empty(2, +1, {}, {});
  CHECK(expand_certificate(empty).is_zero());
}

TEST_CASE("certificates evaluate to the Gaussian closed forms") {
  // direct oracle check of the expanded forms on N(0, sigma^2)
  auto check_value = [](const char* name, int n) {
    MomentExpr e = expand_certificate(SOSCertificate::builtin(name));
    for (Rational sigma : {make_rational(1), make_rational(2)}) {
      Rational s = sigma * sigma;
      Rational expected = make_rational(1, 2);
      for (int k = 1; k <= n - 1; ++k) expected *= k;
      if (n % 2 == 0) expected = -expected;
      for (int k = 0; k < n; ++k) expected /= s;
      CHECK(gaussian_moment_exact(e, sigma) == expected);
    }
  };
  check_value("paper-n2", 2);
  check_value("paper-n3", 3);
  check_value("paper-n4", 4);
}

TEST_CASE("a corrupted coefficient fails verification") {
  // 1/3 -> 1/2 inside the third-derivative square
  SOSCertificate bad(3, +1,
                     {{make_rational(1, 2),
                       parse_rho_polynomial("r3 - r2*r1 + 1/2*r1^3")}},
                     {{make_rational(1, 90),
                       parse_rho_polynomial("r1^6").terms().begin()->first}});
  VerifyReport rep = verify_certificate(bad);
  CHECK(!rep.verified);
  CHECK(!rep.residual.is_zero());
  CHECK(rep.residual_l1 > 0);
}

TEST_CASE("malformed certificates are rejected naming the term") {
  auto r1_6 = parse_rho_polynomial("r1^6").terms().begin()->first;
  auto r1_5_r2 = parse_rho_polynomial("r2*r1^5").terms().begin()->first;

  // negative square coefficient
  CHECK_THROWS_WITH_AS(
      SOSCertificate(3, +1, {{make_rational(-1, 2), parse_rho_polynomial("r3")}}, {}),
      doctest::Contains("square 1"), CertificateError);

  // negative remainder coefficient
  CHECK_THROWS_WITH_AS(
      SOSCertificate(3, +1, {}, {{make_rational(-1, 90), r1_6}}),
      doctest::Contains("remainder 1"), CertificateError);

  // odd remainder exponent (weight 7 also wrong, odd exponent reported first)
  CHECK_THROWS_WITH_AS(SOSCertificate(3, +1, {}, {{make_rational(1, 90), r1_5_r2}}),
                       doctest::Contains("odd exponent"), CertificateError);

  // wrong square weight
  CHECK_THROWS_WITH_AS(
      SOSCertificate(3, +1, {{make_rational(1, 2), parse_rho_polynomial("r2")}}, {}),
      doctest::Contains("weight 2, expected 3"), CertificateError);

  // wrong remainder weight
  CHECK_THROWS_WITH_AS(SOSCertificate(4, -1, {}, {{make_rational(1, 90), r1_6}}),
                       doctest::Contains("expected 8"), CertificateError);

  CHECK_THROWS_AS(SOSCertificate(1, +1, {}, {}), CertificateError);
  CHECK_THROWS_AS(SOSCertificate(2, 0, {}, {}), CertificateError);
}

TEST_CASE("certificate text round trip") {
  for (const auto& name : SOSCertificate::builtin_names()) {
    SOSCertificate cert = SOSCertificate::builtin(name);
    SOSCertificate back = SOSCertificate::parse(cert.str());
    CHECK(back.order() == cert.order());
    CHECK(back.sign() == cert.sign());
    CHECK(expand_certificate(back) == expand_certificate(cert));
    CHECK(back.str() == cert.str());
  }
  CHECK_THROWS_AS(SOSCertificate::parse("order: 3\n"), ParseError);
  CHECK_THROWS_AS(SOSCertificate::parse("order: 3\nsign: 2\n"), ParseError);
  CHECK_THROWS_AS(SOSCertificate::builtin("paper-n9"), InvalidArgument);
}

TEST_CASE("paper notation rendering mentions the f-ratios") {
  std::string s = SOSCertificate::builtin("paper-n3").paper_str();
  CHECK(s.find("f3/f") != std::string::npos);
  CHECK(s.find("1/3*f1^3/f^3") != std::string::npos);
  CHECK(s.find("f1^6/f^5") != std::string::npos);
}

TEST_CASE("search finds exact certificates at orders 2 and 3") {
  for (int order : {2, 3}) {
    SearchConfig cfg;
    cfg.order = order;
    cfg.seed = 17;
    SearchOutcome out = search_certificate(cfg);
    INFO("order ", order, " note: ", out.note);
    REQUIRE(out.found);
    CHECK(out.exact_verified);
    CHECK(out.certificate->order() == order);
    CHECK(verify_certificate(*out.certificate).verified);
    CHECK(out.float_residual < cfg.residual_tolerance);
  }
}

TEST_CASE("search is deterministic in the seed") {
  SearchConfig cfg;
  cfg.order = 3;
  cfg.seed = 4242;
  SearchOutcome a = search_certificate(cfg);
  SearchOutcome b = search_certificate(cfg);
  REQUIRE(a.found == b.found);
  if (a.found) CHECK(a.certificate->str() == b.certificate->str());
  CHECK(a.float_residual == b.float_residual);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("search validates its configuration") {
  SearchConfig cfg;
  cfg.order = 1;
  CHECK_THROWS_AS(search_certificate(cfg), InvalidArgument);
  cfg.order = kDerivativeCap + 1;
  CHECK_THROWS_AS(search_certificate(cfg), OrderCapError);
  cfg = SearchConfig{};
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(search_certificate(cfg), InvalidArgument);
}

TEST_CASE("search at order 4 reproduces feasibility") {
  SearchConfig cfg;
  cfg.order = 4;
  cfg.seed = 1;
  SearchOutcome out = search_certificate(cfg);
  INFO("note: ", out.note, " float residual ", out.float_residual);
  REQUIRE(out.found);
  CHECK(verify_certificate(*out.certificate).verified);
}
