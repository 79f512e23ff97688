#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gcmc/errors.hpp"
#include "gcmc/monotonicity.hpp"

using namespace gcmc;

namespace {

// d^n/dt^n 1/(a+t) = (-1)^n n!/(a+t)^{n+1}
double gaussian_fisher_derivative(double a, double t, int n) {
  double v = 1.0;
  for (int k = 1; k <= n; ++k) v *= k;
  v /= std::pow(a + t, n + 1);
  return (n % 2 == 0) ? v : -v;
}

}  // namespace

TEST_CASE("sign table on a pure Gaussian matches 1/(a+t) exactly") {
  GaussianMixture m = GaussianMixture::gaussian(0.0, 1.0);
  SignReport rep = sign_table(m, 1.0, 6);
  REQUIRE(rep.entries.size() == 7);
  // at s = 2: 1/2, -1/4, 1/4, -3/8, 3/4, -15/8, 45/8
  const double expected[] = {0.5, -0.25, 0.25, -0.375, 0.75, -1.875, 5.625};
  const char signs[] = {'+', '-', '+', '-', '+', '-', '+'};
  for (int n = 0; n <= 6; ++n) {
    CHECK(rep.entries[n].value ==
          doctest::Approx(expected[n]).epsilon(1e-8));
    CHECK(rep.entries[n].sign == signs[n]);
    CHECK(rep.entries[n].converged);
  }
}

TEST_CASE("Gaussian exactness across a t grid") {
  for (double a : {0.5, 1.0, 2.0}) {
    GaussianMixture m = GaussianMixture::gaussian(0.0, a);
    for (double t : {0.1, 1.0, 10.0}) {
      SignReport rep = sign_table(m, t, 6);
      for (int n = 0; n <= 6; ++n)
        CHECK(rep.entries[n].value ==
              doctest::Approx(gaussian_fisher_derivative(a, t, n)).epsilon(1e-8));
    }
  }
}

TEST_CASE("far-separated symmetric mixture keeps alternating signs to order 7") {
  GaussianMixture m({{0.5, -5.0, 1.0}, {0.5, 5.0, 1.0}});
  SignReport rep = sign_table(m, 1.0, 7);
  for (int n = 0; n <= 7; ++n) {
    char expected = (n % 2 == 0) ? '+' : '-';
    CHECK(rep.entries[n].sign == expected);
  }
}

TEST_CASE("first derivative of Fisher information is negative") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> lam(0.1, 0.9);
  std::uniform_real_distribution<double> sep(0.0, 8.0);
  std::uniform_real_distribution<double> tdist(0.1, 5.0);
  for (int rep = 0; rep < 8; ++rep) {
    double d = sep(rng);
    GaussianMixture m({{lam(rng), -d / 2, 1.0}, {1.0 - lam(rng) * 0, d / 2, 1.0}});
    SignReport table = sign_table(m, tdist(rng), 1);
    CHECK(table.entries[1].value < 0.0);
  }
}

TEST_CASE("Richardson cross-check agrees with the symbolic route") {
  GaussianMixture m({{0.4, -1.5, 1.0}, {0.6, 1.5, 1.0}});
  QuadratureConfig cfg;
  cfg.relative_tolerance = 1e-12;
  SignReport rep = sign_table(m, 1.0, 4, cfg, /*with_fd_check=*/true);
  for (int n = 1; n <= 4; ++n) {
    REQUIRE(rep.entries[n].has_fd);
    CHECK(rep.entries[n].fd_value ==
          doctest::Approx(rep.entries[n].value).epsilon(1e-5));
  }
}

TEST_CASE("zero-band policy refuses sign claims near zero") {
  GaussianMixture m = GaussianMixture::gaussian(0.0, 1.0);
  SignReport rep = sign_table(m, 1.0, 3);
  // I(Y_1) = 1/2 so the band is 1e-10 * 1
  CHECK(rep.zero_band == doctest::Approx(1e-10));

  // the sign classifier itself
  ScanConfig cfg;
  cfg.lambdas = {0.5};
  cfg.ds = {0.0};
  cfg.ts = {1.0};
  cfg.max_order = 1;
  // inject a zero expression: order-0 value 0 forces the '0' sign
  std::vector<MomentExpr> exprs = {MomentExpr(), MomentExpr()};
  ScanReport rep2 = scan_with_expressions(cfg, exprs);
  for (const auto& row : rep2.rows) CHECK(row.sign == '0');
  CHECK(rep2.violations.empty());
}

TEST_CASE("sign table validates input") {
  GaussianMixture m = GaussianMixture::gaussian(0.0, 1.0);
  CHECK_THROWS_AS(sign_table(m, 0.0, 3), InvalidArgument);
  CHECK_THROWS_AS(sign_table(m, 1.0, kDerivativeCap), OrderCapError);
}

TEST_CASE("small scan replicates the alternating pattern with zero violations") {
  ScanConfig cfg;
  cfg.lambdas = {0.1, 0.3, 0.5};
  cfg.ds = {1.0, 5.0, 10.0, 20.0};
  const double lo = std::log(0.01), hi = std::log(10.0);
  for (int i = 0; i < 9; ++i) cfg.ts.push_back(std::exp(lo + (hi - lo) * i / 8.0));
  cfg.max_order = 7;
  cfg.jobs = 2;
  ScanReport rep = cm_scan(cfg);
  CHECK(rep.rows.size() == 3 * 4 * 9 * 8);
  CHECK(rep.violations.empty());
  CHECK(rep.logconvex_violations.empty());
  CHECK(rep.flagged == 0);

  // determinism of the parallel sweep
  ScanReport rep2 = cm_scan(cfg);
  CHECK(rep.to_csv() == rep2.to_csv());
  CHECK(rep.to_json() == rep2.to_json());
}

TEST_CASE("degenerate d=0 line matches the Gaussian closed form") {
  ScanConfig cfg;
  cfg.lambdas = {0.25};
  cfg.ds = {0.0};
  cfg.ts = {0.5, 1.0, 2.0};
  cfg.max_order = 5;
  ScanReport rep = cm_scan(cfg);
  CHECK(rep.violations.empty());
  for (const auto& row : rep.rows) {
    double expect = gaussian_fisher_derivative(1.0, row.t, row.order);
    CHECK(row.value == doctest::Approx(expect).epsilon(1e-7));
  }
}

TEST_CASE("fault injection: a corrupted derivative is detected") {
  ScanConfig cfg;
  cfg.lambdas = {0.3};
  cfg.ds = {2.0};
  cfg.ts = {0.5, 1.0};
  cfg.max_order = 3;
  std::vector<MomentExpr> derivs;
  for (int n = 0; n <= 3; ++n) derivs.push_back(fisher_derivative(n));
  // flip the sign of the order-2 expression
  derivs[2] *= Rational(-1);
  ScanReport rep = scan_with_expressions(cfg, derivs);
  CHECK(!rep.violations.empty());
  for (const auto& v : rep.violations) CHECK(v.order == 2);
}

TEST_CASE("scan serializations carry the expected columns") {
  ScanConfig cfg;
  cfg.lambdas = {0.5};
  cfg.ds = {1.0};
  cfg.ts = {1.0};
  cfg.max_order = 2;
  ScanReport rep = cm_scan(cfg);
  CHECK(rep.to_csv().rfind("lambda,d,t,order,value,sign,flag\n", 0) == 0);
  CHECK(rep.heatmap_csv().rfind("lambda,d,minMarginOverT\n", 0) == 0);
  CHECK(rep.to_json().find("\"schemaVersion\": 1") != std::string::npos);
  CHECK(rep.to_json().find("\"violationCount\": 0") != std::string::npos);
}

TEST_CASE("scan validates its grid") {
  ScanConfig cfg;
  cfg.lambdas = {1.5};
  cfg.ds = {1.0};
  cfg.ts = {1.0};
  CHECK_THROWS_AS(cm_scan(cfg), InvalidArgument);
  cfg.lambdas = {0.5};
  cfg.ts = {-1.0};
  CHECK_THROWS_AS(cm_scan(cfg), InvalidArgument);
  cfg.ts = {1.0};
  cfg.max_order = kDerivativeCap;
  CHECK_THROWS_AS(cm_scan(cfg), OrderCapError);
}

TEST_CASE("log-convexity of Fisher information") {
  // N(0,1) at t=1: I*I'' - (I')^2 = (1/2)(2/8) - (1/4)^2 = 1/16
  GaussianMixture m = GaussianMixture::gaussian(0.0, 1.0);
  LogConvexityReport rep = log_convexity_check(m, 1.0, 4);
  CHECK(rep.function_margin == doctest::Approx(1.0 / 16.0).epsilon(1e-8));
  CHECK(rep.ok);

  // factorial sequence n!/s^{n+1} is log-convex
  for (double margin : rep.sequence_margins) CHECK(margin > -1e-12);

  // well-separated mixture across a t grid
  GaussianMixture far({{0.5, -5.0, 1.0}, {0.5, 5.0, 1.0}});
  for (double t : {0.1, 1.0, 5.0}) {
    LogConvexityReport r = log_convexity_check(far, t, 5);
    CHECK(r.ok);
    CHECK(r.function_margin > 0.0);
  }

  CHECK_THROWS_AS(log_convexity_check(m, 1.0, 1), InvalidArgument);
}

TEST_CASE("reciprocal profiles and the one-way implication") {
  // 1/n is log-convex; its reciprocal (1,2,3,4) is log-concave
  std::vector<double> inv = {1.0, 0.5, 1.0 / 3.0, 0.25};
  ReciprocalReport rep = reciprocal_profile(inv);
  CHECK(rep.log_convex);
  CHECK(rep.reciprocal_log_concave);
  CHECK(rep.implication_ok);

  // geometric sequence: equality case, both verdicts on both sides
  std::vector<double> geo = {1.0, 0.5, 0.25, 0.125};
  ReciprocalReport g = reciprocal_profile(geo);
  CHECK(g.log_convex);
  CHECK(g.log_concave);
  CHECK(g.reciprocal_log_convex);
  CHECK(g.reciprocal_log_concave);

  // (1,2,3): log-concave, not log-convex; reciprocal is log-convex,
  // illustrating that the converse implication fails
  std::vector<double> lin = {1.0, 2.0, 3.0};
  ReciprocalReport l = reciprocal_profile(lin);
  CHECK(l.log_concave);
  CHECK(!l.log_convex);
  CHECK(l.reciprocal_log_convex);
  CHECK(l.implication_ok);  // vacuous: input not log-convex

  CHECK_THROWS_AS(reciprocal_profile(std::vector<double>{1.0, -2.0}), InvalidArgument);
  CHECK_THROWS_AS(reciprocal_profile(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("flow curve emits h, I and derivative columns") {
  GaussianMixture m = GaussianMixture::gaussian(0.0, 1.0);
  std::vector<double> ts = {0.5, 1.0, 2.0};
  FlowReport rep = flow_curve(m, ts, 4);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.to_csv().rfind("t,h,I,dI1,dI2,dI3,dI4\n", 0) == 0);
  for (const auto& row : rep.rows) {
    double s = 1.0 + row.t;
    CHECK(row.h == doctest::Approx(0.5 * std::log(2 * M_PI * M_E * s)).epsilon(1e-9));
    CHECK(row.fisher == doctest::Approx(1.0 / s).epsilon(1e-9));
    for (int n = 1; n <= 4; ++n)
      CHECK(row.dI[n - 1] ==
            doctest::Approx(gaussian_fisher_derivative(1.0, row.t, n)).epsilon(1e-7));
  }
}
