#pragma once

#include <span>
#include <string>
#include <vector>

#include "gcmc/densities.hpp"
#include "gcmc/functionals.hpp"
#include "gcmc/moments.hpp"

namespace gcmc {

// Signs are claimed only outside a zero band: |value| below
// 1e-10 * max(1, I(Y_t)) reports '0'.
struct SignEntry {
  int order = 0;
  double value = 0.0;
  char sign = '0';  // '+', '-', '0'
  bool converged = true;
  double fd_value = 0.0;  // Richardson cross-check, when requested
  bool has_fd = false;
};

struct SignReport {
  double t = 0.0;
  double zero_band = 0.0;
  std::vector<SignEntry> entries;

  std::string to_csv() const;   // t,order,value,sign,flag
  std::string to_json() const;
};

// d^n I/dt^n computed as moment_eval(fisher_derivative(n), evolve(m, t))
// for n = 0..max_order; no finite differencing in the product path. The
// optional cross-check column runs Richardson-extrapolated central
// differences of fisher(evolve(m, .)).
SignReport sign_table(const GaussianMixture& m, double t, int max_order,
                      const QuadratureConfig& cfg = {}, bool with_fd_check = false);

// Richardson-extrapolated central finite difference of
// d^n/dt^n fisher(evolve(m, t)); the independent cross-check route.
double fisher_derivative_fd(const GaussianMixture& m, double t, int n,
                            const QuadratureConfig& cfg = {});

struct ScanConfig {
  std::vector<double> lambdas;  // in (0,1)
  std::vector<double> ds;       // >= 0
  std::vector<double> ts;       // > 0
  int max_order = 7;
  QuadratureConfig quad;
  int jobs = 1;

  static ScanConfig defaults();
  void validate() const;
};

struct ScanRow {
  double lambda = 0.0, d = 0.0, t = 0.0;
  int order = 0;
  double value = 0.0;
  char sign = '0';
  bool converged = true;
};

struct ScanViolation {
  double lambda = 0.0, d = 0.0, t = 0.0;
  int order = 0;
  double value = 0.0;
  std::string kind;  // "sign" or "logconvex"
};

struct ScanReport {
  ScanConfig config;
  std::vector<ScanRow> rows;  // deterministic lambda -> d -> t -> order
  std::vector<ScanViolation> violations;            // alternating-sign failures
  std::vector<ScanViolation> logconvex_violations;  // |g_n|^2 > |g_{n-1}||g_{n+1}|
  std::size_t flagged = 0;  // entries whose quadrature did not converge

  std::size_t violation_count() const {
    return violations.size() + logconvex_violations.size();
  }

  std::string to_csv() const;      // lambda,d,t,order,value,sign,flag
  std::string heatmap_csv() const; // lambda,d,minMarginOverT
  std::string to_json() const;
};

// Exhaustive deterministic sweep of two-component unit-variance mixtures
// (means at -d/2, +d/2, weights lambda / 1-lambda) checking the
// alternating-sign pattern and derivative-magnitude log-convexity up to
// max_order. Non-converged entries are flagged and excluded from the
// violation statistics.
ScanReport cm_scan(const ScanConfig& cfg);

// Fault-injection seam: same sweep against caller-provided derivative
// expressions (index n holds d^n I/dt^n). cm_scan passes the canonical
// fisher_derivative stack.
ScanReport scan_with_expressions(const ScanConfig& cfg,
                                 std::span<const MomentExpr> derivatives);

struct LogConvexityReport {
  double t = 0.0;
  // I*I'' - (I')^2, nonnegative when I is log-convex at t.
  double function_margin = 0.0;
  // |g_{n-1}||g_{n+1}| - g_n^2 for n = 1..max_order-1.
  std::vector<double> sequence_margins;
  bool ok = true;

  std::string to_json() const;
};

LogConvexityReport log_convexity_check(const GaussianMixture& m, double t,
                                       int max_order,
                                       const QuadratureConfig& cfg = {});

struct ReciprocalReport {
  std::vector<double> values;
  bool log_convex = false;
  bool log_concave = false;
  bool reciprocal_log_concave = false;
  bool reciprocal_log_convex = false;
  // log-convex input forces a log-concave reciprocal; the converse is
  // not asserted.
  bool implication_ok = true;

  std::string to_json() const;
};

// Rejects nonpositive entries.
ReciprocalReport reciprocal_profile(std::span<const double> seq);

struct FlowRow {
  double t = 0.0;
  double h = 0.0;
  double fisher = 0.0;
  std::vector<double> dI;  // d^1..d^max_order I/dt^n
};

struct FlowReport {
  int max_order = 4;
  std::vector<FlowRow> rows;

  std::string to_csv() const;  // t,h,I,dI1..dIn
  std::string to_json() const;
};

FlowReport flow_curve(const GaussianMixture& m, std::span<const double> ts,
                      int max_order = 4, const QuadratureConfig& cfg = {});

}  // namespace gcmc
