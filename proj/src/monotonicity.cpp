#include "gcmc/monotonicity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "gcmc/errors.hpp"

namespace gcmc {

using json = nlohmann::ordered_json;

namespace {

constexpr double kZeroBandRatio = 1e-10;
// relative slack for the log-convexity margins (quadrature noise floor)
constexpr double kLogConvexBand = 1e-6;

char classify_sign(double value, double band) {
  if (std::abs(value) < band) return '0';
  return value > 0 ? '+' : '-';
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

double fisher_derivative_fd(const GaussianMixture& m, double t, int n,
                            const QuadratureConfig& cfg) {
  if (n < 1) throw InvalidArgument("finite-difference order must be >= 1");
  if (!(t > 0.0)) throw InvalidArgument("finite differences need t > 0");
  auto F = [&](double tau) { return fisher(evolve(m, tau), cfg).value; };

  // central n-th difference; keep the leftmost stencil point positive
  double h0 = std::min(1e-2 * t, 1.8 * t / n);
  auto central = [&](double h) {
    double sum = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      double node = t + (n / 2.0 - k) * h;
      sum += (k % 2 == 0 ? 1.0 : -1.0) * binom * F(node);
      binom = binom * (n - k) / (k + 1.0);
    }
    return sum / std::pow(h, n);
  };

  // three levels, eliminating the h^2 and h^4 error terms
  double d0 = central(h0), d1 = central(h0 / 2), d2 = central(h0 / 4);
  double r0 = (4.0 * d1 - d0) / 3.0;
  double r1 = (4.0 * d2 - d1) / 3.0;
  return (16.0 * r1 - r0) / 15.0;
}

SignReport sign_table(const GaussianMixture& m, double t, int max_order,
                      const QuadratureConfig& cfg, bool with_fd_check) {
  if (!(t > 0.0)) throw InvalidArgument("sign_table requires t > 0");
  if (max_order < 0 || max_order > kDerivativeCap - 1)
    throw OrderCapError("sign_table order " + std::to_string(max_order) +
                        " outside [0, " + std::to_string(kDerivativeCap - 1) + "]");
  // raw cascade forms: E_f-equivalent to the canonical derivatives but
  // with small coefficients, so quadrature does not have to cancel
  // 1e8-scale terms down to order one
  std::vector<MomentExpr> exprs;
  for (int n = 0; n <= max_order; ++n) exprs.push_back(fisher_derivative_raw(n));

  GaussianMixture evolved = evolve(m, t);
  std::vector<EvalResult> vals = moment_eval_many(exprs, evolved, cfg);

  SignReport rep;
  rep.t = t;
  rep.zero_band = kZeroBandRatio * std::max(1.0, std::abs(vals[0].value));
  for (int n = 0; n <= max_order; ++n) {
    SignEntry e;
    e.order = n;
    e.value = vals[n].value;
    e.converged = vals[n].converged;
    e.sign = classify_sign(e.value, rep.zero_band);
    if (with_fd_check && n >= 1) {
      e.fd_value = fisher_derivative_fd(m, t, n, cfg);
      e.has_fd = true;
    }
    rep.entries.push_back(e);
  }
  return rep;
}

std::string SignReport::to_csv() const {
  std::string out = "t,order,value,sign,flag\n";
  for (const auto& e : entries)
    out += fmt(t) + "," + std::to_string(e.order) + "," + fmt(e.value) + "," +
           std::string(1, e.sign) + "," + (e.converged ? "ok" : "nonconverged") + "\n";
  return out;
}

std::string SignReport::to_json() const {
  json j;
  j["schemaVersion"] = 1;
  j["kind"] = "sign-table";
  j["t"] = t;
  j["zeroBand"] = zero_band;
  j["entries"] = json::array();
  for (const auto& e : entries) {
    json je;
    je["order"] = e.order;
    je["value"] = e.value;
    je["sign"] = std::string(1, e.sign);
    je["converged"] = e.converged;
    if (e.has_fd) je["fdValue"] = e.fd_value;
    j["entries"].push_back(je);
  }
  return j.dump(2);
}

ScanConfig ScanConfig::defaults() {
  ScanConfig cfg;
  for (int i = 1; i <= 10; ++i) cfg.lambdas.push_back(0.05 * i);
  for (int i = 1; i <= 40; ++i) cfg.ds.push_back(0.5 * i);
  const int nt = 40;
  const double lo = std::log(1e-2), hi = std::log(10.0);
  for (int i = 0; i < nt; ++i)
    cfg.ts.push_back(std::exp(lo + (hi - lo) * i / (nt - 1)));
  cfg.max_order = 7;
  cfg.jobs = 1;
  return cfg;
}

void ScanConfig::validate() const {
  if (lambdas.empty() || ds.empty() || ts.empty())
    throw InvalidArgument("scan grid must be nonempty in lambda, d and t");
  for (double l : lambdas)
    if (!(l > 0.0) || !(l < 1.0))
      throw InvalidArgument("scan lambda values must lie in (0,1)");
  for (double d : ds)
    if (d < 0.0) throw InvalidArgument("scan separations must be >= 0");
  for (double t : ts)
    if (!(t > 0.0)) throw InvalidArgument("scan times must be > 0");
  if (max_order < 1 || max_order > kDerivativeCap - 1)
    throw OrderCapError("scan max order " + std::to_string(max_order) +
                        " outside [1, " + std::to_string(kDerivativeCap - 1) + "]");
  if (jobs < 1) throw InvalidArgument("jobs must be >= 1");
}

ScanReport scan_with_expressions(const ScanConfig& cfg,
                                 std::span<const MomentExpr> derivatives) {
  cfg.validate();
  if (derivatives.size() != static_cast<std::size_t>(cfg.max_order) + 1)
    throw InvalidArgument("need one derivative expression per order 0..max_order");
  const int orders = cfg.max_order + 1;

  struct Cell {
    std::vector<EvalResult> vals;
  };
  const std::size_t n_pairs = cfg.lambdas.size() * cfg.ds.size();
  const std::size_t n_t = cfg.ts.size();
  std::vector<Cell> cells(n_pairs * n_t);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t p = next.fetch_add(1);
      if (p >= n_pairs) return;
      double lambda = cfg.lambdas[p / cfg.ds.size()];
      double d = cfg.ds[p % cfg.ds.size()];
      GaussianMixture mix({{lambda, -d / 2.0, 1.0}, {1.0 - lambda, d / 2.0, 1.0}});
      for (std::size_t it = 0; it < n_t; ++it) {
        GaussianMixture evolved = evolve(mix, cfg.ts[it]);
        cells[p * n_t + it].vals = moment_eval_many(derivatives, evolved, cfg.quad);
      }
    }
  };

  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ScanReport rep;
  rep.config = cfg;
  rep.rows.reserve(cells.size() * orders);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    double lambda = cfg.lambdas[p / cfg.ds.size()];
    double d = cfg.ds[p % cfg.ds.size()];
    for (std::size_t it = 0; it < n_t; ++it) {
      const auto& vals = cells[p * n_t + it].vals;
      double t = cfg.ts[it];
      double band = kZeroBandRatio * std::max(1.0, std::abs(vals[0].value));
      bool all_ok = true;
      for (int n = 0; n < orders; ++n) all_ok = all_ok && vals[n].converged;

      for (int n = 0; n < orders; ++n) {
        ScanRow row;
        row.lambda = lambda;
        row.d = d;
        row.t = t;
        row.order = n;
        row.value = vals[n].value;
        row.converged = vals[n].converged;
        row.sign = classify_sign(row.value, band);
        rep.rows.push_back(row);

        if (!row.converged) {
          ++rep.flagged;
          continue;
        }
        char expected = (n % 2 == 0) ? '+' : '-';
        if (row.sign != '0' && row.sign != expected)
          rep.violations.push_back({lambda, d, t, n, row.value, "sign"});
      }

      if (!all_ok) continue;  // flagged cells stay out of the statistics
      for (int n = 1; n + 1 < orders; ++n) {
        double gn = vals[n].value, lo = vals[n - 1].value, hi = vals[n + 1].value;
        if (std::abs(gn) < band || std::abs(lo) < band || std::abs(hi) < band)
          continue;
        double margin = std::abs(lo) * std::abs(hi) - gn * gn;
        double scale = std::max(gn * gn, std::abs(lo) * std::abs(hi));
        if (margin < -kLogConvexBand * scale)
          rep.logconvex_violations.push_back({lambda, d, t, n, margin, "logconvex"});
      }
    }
  }
  return rep;
}

ScanReport cm_scan(const ScanConfig& cfg) {
  cfg.validate();
  std::vector<MomentExpr> derivs;
  for (int n = 0; n <= cfg.max_order; ++n) derivs.push_back(fisher_derivative_raw(n));
  return scan_with_expressions(cfg, derivs);
}

std::string ScanReport::to_csv() const {
  std::string out = "lambda,d,t,order,value,sign,flag\n";
  out.reserve(rows.size() * 64);
  for (const auto& r : rows)
    out += fmt(r.lambda) + "," + fmt(r.d) + "," + fmt(r.t) + "," +
           std::to_string(r.order) + "," + fmt(r.value) + "," +
           std::string(1, r.sign) + "," + (r.converged ? "ok" : "nonconverged") + "\n";
  return out;
}

std::string ScanReport::heatmap_csv() const {
  // min over t and order of the sign-corrected value (-1)^n v_n; a
  // negative entry marks a violation cell.
  std::map<std::pair<double, double>, double> cells;
  for (const auto& r : rows) {
    if (!r.converged) continue;
    double corrected = (r.order % 2 == 0) ? r.value : -r.value;
    auto key = std::make_pair(r.lambda, r.d);
    auto it = cells.find(key);
    if (it == cells.end())
      cells.emplace(key, corrected);
    else
      it->second = std::min(it->second, corrected);
  }
  std::string out = "lambda,d,minMarginOverT\n";
  for (const auto& [key, v] : cells)
    out += fmt(key.first) + "," + fmt(key.second) + "," + fmt(v) + "\n";
  return out;
}

std::string ScanReport::to_json() const {
  json j;
  j["schemaVersion"] = 1;
  j["kind"] = "cm-scan";
  j["grid"]["lambda"] = config.lambdas;
  j["grid"]["d"] = config.ds;
  j["grid"]["t"] = config.ts;
  j["grid"]["maxOrder"] = config.max_order;
  j["rowCount"] = rows.size();
  j["flagged"] = flagged;
  auto dump_violations = [](const std::vector<ScanViolation>& vs) {
    json arr = json::array();
    for (const auto& v : vs) {
      json jv;
      jv["lambda"] = v.lambda;
      jv["d"] = v.d;
      jv["t"] = v.t;
      jv["order"] = v.order;
      jv["value"] = v.value;
      jv["kind"] = v.kind;
      arr.push_back(jv);
    }
    return arr;
  };
  j["signViolations"] = dump_violations(violations);
  j["logConvexViolations"] = dump_violations(logconvex_violations);
  j["violationCount"] = violation_count();
  return j.dump(2);
}

LogConvexityReport log_convexity_check(const GaussianMixture& m, double t,
                                       int max_order, const QuadratureConfig& cfg) {
  if (max_order < 2) throw InvalidArgument("log-convexity check needs max_order >= 2");
  std::vector<MomentExpr> exprs;
  for (int n = 0; n <= max_order; ++n) exprs.push_back(fisher_derivative_raw(n));
  GaussianMixture evolved = evolve(m, t);
  std::vector<EvalResult> vals = moment_eval_many(exprs, evolved, cfg);

  LogConvexityReport rep;
  rep.t = t;
  double g0 = vals[0].value, g1 = vals[1].value, g2 = vals[2].value;
  rep.function_margin = g0 * g2 - g1 * g1;
  double fscale = std::max(std::abs(g0 * g2), g1 * g1);
  rep.ok = rep.function_margin >= -kLogConvexBand * fscale;
  for (int n = 1; n + 1 <= max_order; ++n) {
    double margin = std::abs(vals[n - 1].value) * std::abs(vals[n + 1].value) -
                    vals[n].value * vals[n].value;
    rep.sequence_margins.push_back(margin);
    double scale = std::max(vals[n].value * vals[n].value,
                            std::abs(vals[n - 1].value * vals[n + 1].value));
    if (margin < -kLogConvexBand * scale) rep.ok = false;
  }
  return rep;
}

std::string LogConvexityReport::to_json() const {
  json j;
  j["schemaVersion"] = 1;
  j["kind"] = "log-convexity";
  j["t"] = t;
  j["functionMargin"] = function_margin;
  j["sequenceMargins"] = sequence_margins;
  j["ok"] = ok;
  return j.dump(2);
}

ReciprocalReport reciprocal_profile(std::span<const double> seq) {
  if (seq.size() < 1) throw InvalidArgument("sequence must be nonempty");
  for (double v : seq)
    if (!(v > 0.0))
      throw InvalidArgument("reciprocal profile needs strictly positive entries");

  auto margins_ok = [&](auto value, bool concave) {
    // tolerance band for float inputs
    for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
      double a = value(i - 1), b = value(i), c = value(i + 1);
      double lhs = b * b, rhs = a * c;
      double tol = 1e-12 * std::max(lhs, rhs);
      if (concave ? lhs < rhs - tol : lhs > rhs + tol) return false;
    }
    return true;
  };
  auto direct = [&](std::size_t i) { return seq[i]; };
  auto recip = [&](std::size_t i) { return 1.0 / seq[i]; };

  ReciprocalReport rep;
  rep.values.assign(seq.begin(), seq.end());
  rep.log_concave = margins_ok(direct, true);
  rep.log_convex = margins_ok(direct, false);
  rep.reciprocal_log_concave = margins_ok(recip, true);
  rep.reciprocal_log_convex = margins_ok(recip, false);
  rep.implication_ok = !rep.log_convex || rep.reciprocal_log_concave;
  return rep;
}

std::string ReciprocalReport::to_json() const {
  json j;
  j["schemaVersion"] = 1;
  j["kind"] = "reciprocal-profile";
  j["values"] = values;
  j["logConvex"] = log_convex;
  j["logConcave"] = log_concave;
  j["reciprocalLogConcave"] = reciprocal_log_concave;
  j["reciprocalLogConvex"] = reciprocal_log_convex;
  j["implicationHolds"] = implication_ok;
  return j.dump(2);
}

FlowReport flow_curve(const GaussianMixture& m, std::span<const double> ts,
                      int max_order, const QuadratureConfig& cfg) {
  if (max_order < 1 || max_order > kDerivativeCap - 1)
    throw OrderCapError("flow max order " + std::to_string(max_order) +
                        " outside [1, " + std::to_string(kDerivativeCap - 1) + "]");
  std::vector<MomentExpr> exprs;
  for (int n = 1; n <= max_order; ++n) exprs.push_back(fisher_derivative_raw(n));

  FlowReport rep;
  rep.max_order = max_order;
  for (double t : ts) {
    if (!(t > 0.0)) throw InvalidArgument("flow times must be > 0");
    GaussianMixture evolved = evolve(m, t);
    FlowRow row;
    row.t = t;
    row.h = entropy(evolved, cfg).value;
    row.fisher = fisher(evolved, cfg).value;
    auto vals = moment_eval_many(exprs, evolved, cfg);
    for (const auto& v : vals) row.dI.push_back(v.value);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::string FlowReport::to_csv() const {
  std::string out = "t,h,I";
  for (int n = 1; n <= max_order; ++n) out += ",dI" + std::to_string(n);
  out += "\n";
  for (const auto& r : rows) {
    out += fmt(r.t) + "," + fmt(r.h) + "," + fmt(r.fisher);
    for (double v : r.dI) out += "," + fmt(v);
    out += "\n";
  }
  return out;
}

std::string FlowReport::to_json() const {
  json j;
  j["schemaVersion"] = 1;
  j["kind"] = "flow";
  j["maxOrder"] = max_order;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    json jr;
    jr["t"] = r.t;
    jr["h"] = r.h;
    jr["I"] = r.fisher;
    jr["dI"] = r.dI;
    j["rows"].push_back(jr);
  }
  return j.dump(2);
}

}  // namespace gcmc
