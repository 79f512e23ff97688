#include "gcmc/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>

#include "gcmc/errors.hpp"

namespace gcmc {

void QuadratureConfig::validate() const {
  if (points_per_component < 16)
    throw InvalidArgument("quadrature needs at least 16 points per component");
  if (!(tail_cutoff_ratio > 0.0) || !(tail_cutoff_ratio < 1.0))
    throw InvalidArgument("tail cutoff ratio must be in (0, 1)");
  if (!(relative_tolerance > 0.0))
    throw InvalidArgument("relative tolerance must be positive");
  if (max_doublings < 0) throw InvalidArgument("max_doublings must be >= 0");
}

namespace {

// Orthonormal Hermite H~_n at z with periodic renormalization so the
// recurrence never overflows (raw values grow like e^{z^2/2}).
// value of H~_n = pn * 1e300^scale, H~_{n-1} = pn1 * same scale.
struct HermiteEval {
  double pn = 0.0;
  double pn1 = 0.0;
  int scale = 0;
};

HermiteEval hermite_ortho(int n, double z) {
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  double p1 = pim4, p2 = 0.0;
  int scale = 0;
  for (int j = 0; j < n; ++j) {
    double p3 = p2;
    p2 = p1;
    p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
    if (std::abs(p1) > 1e300) {
      p1 *= 1e-300;
      p2 *= 1e-300;
      ++scale;
    }
  }
  return {p1, p2, scale};
}

GaussHermiteRule compute_gauss_hermite(int n) {
  // Positive roots by WKB marching from the center (bulk spacing
  // pi / sqrt(2n+1-z^2)) with Newton polish on the scaled recurrence;
  // mirrored to the negative axis. Validated below; sizes past ~2000
  // would need sharper edge asymptotics and are rejected loudly.
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const double capacity_sq = 2.0 * n + 1.0;

  auto newton = [&](double z0) {
    double z = z0;
    for (int it = 0; it < 100; ++it) {
      HermiteEval h = hermite_ortho(n, z);
      double pp = std::sqrt(2.0 * n) * h.pn1;
      double dz = h.pn / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    return z;
  };
  auto weight_at = [&](double z) {
    HermiteEval h = hermite_ortho(n, z);
    double pp = std::sqrt(2.0 * n) * std::abs(h.pn1);
    // w = 2 / (pp * 1e300^scale)^2, computed in log10 to underflow cleanly
    double log10w =
        std::log10(2.0) - 2.0 * (std::log10(pp) + 300.0 * h.scale);
    return std::pow(10.0, log10w);
  };

  std::vector<double> pos;
  double prev = 0.0;
  bool odd = (n % 2) == 1;
  const int m = n / 2;
  for (int k = 0; k < m; ++k) {
    double gap = std::numbers::pi / std::sqrt(std::max(capacity_sq - prev * prev, 4.0));
    double guess = (k == 0 && !odd) ? 0.5 * gap : prev + gap;
    double z = newton(guess);
    // recover from re-converging onto the previous root near the edge
    for (int attempt = 0; attempt < 50 && z <= prev + 1e-12; ++attempt) {
      guess += 0.5 * gap;
      z = newton(guess);
    }
    pos.push_back(z);
    prev = z;
  }

  if (odd) {
    rule.nodes[m] = 0.0;
    rule.weights[m] = weight_at(0.0);
  }
  for (int k = 0; k < m; ++k) {
    double w = weight_at(pos[k]);
    int hi = odd ? m + 1 + k : m + k;
    int lo = odd ? m - 1 - k : m - 1 - k;
    rule.nodes[hi] = pos[k];
    rule.nodes[lo] = -pos[k];
    rule.weights[hi] = w;
    rule.weights[lo] = w;
  }

  for (int i = 1; i < n; ++i)
    if (!(rule.nodes[i] > rule.nodes[i - 1]))
      throw Error("Gauss-Hermite rule of size " + std::to_string(n) +
                  " failed to separate its nodes");
  double total = 0.0;
  for (double w : rule.weights) total += w;
  const double sqrt_pi = 1.7724538509055160273;
  if (std::abs(total - sqrt_pi) > 1e-10 * sqrt_pi)
    throw Error("Gauss-Hermite rule of size " + std::to_string(n) +
                " lost weight-sum accuracy");
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
  return it->second;
}

namespace {

constexpr double kInvSqrtPi = 0.5641895835477563;

struct PassResult {
  std::vector<double> values;
  std::vector<double> term_l1;  // roundoff floor per output
  double cutoff_mass = 0.0;
};

// One quadrature pass at `points` Gauss-Hermite nodes per component.
// integrand(y, log_f, rho, out) adds nothing; it fills out[0..n_out).
PassResult quadrature_pass(
    const GaussianMixture& m, int max_rho_index, int n_out, int points,
    const QuadratureConfig& cfg,
    const std::function<void(double, double, const double*, double*)>& integrand) {
  PassResult res;
  res.values.assign(n_out, 0.0);
  res.term_l1.assign(n_out, 0.0);

  // Reference density height for the tail cutoff.
  double log_fmax = -std::numeric_limits<double>::infinity();
  for (const auto& c : m.components())
    log_fmax = std::max(log_fmax, m.log_pdf(c.mean));
  const double log_cut = log_fmax + std::log(cfg.tail_cutoff_ratio);

  const GaussHermiteRule& rule = gauss_hermite(points);
  std::vector<double> rho(std::max(max_rho_index, 1));
  std::vector<double> out(n_out);

  for (const auto& c : m.components()) {
    const double s = std::sqrt(2.0 * c.variance);
    for (int i = 0; i < points; ++i) {
      const double y = c.mean + s * rule.nodes[i];
      const double node_w = c.weight * rule.weights[i] * kInvSqrtPi;
      double log_f;
      m.score_ratios(y, max_rho_index, &log_f, rho.data());
      if (log_f < log_cut) {
        res.cutoff_mass += node_w;
        continue;
      }
      integrand(y, log_f, rho.data(), out.data());
      for (int k = 0; k < n_out; ++k) {
        double t = node_w * out[k];
        res.values[k] += t;
        res.term_l1[k] += std::abs(t);
      }
    }
  }
  return res;
}

// Composite trapezoid over the full support. The per-component panels
// cannot resolve the softmax transition between separated components
// (width sigma^2/d) without O((d/sigma)^2) nodes, so multi-component
// mixtures integrate on a uniform grid whose spacing tracks both the
// narrowest component and the narrowest transition strip.
double trapezoid_spacing(const GaussianMixture& m, int base_points) {
  double h = 8.0 * m.min_sigma() / static_cast<double>(base_points);
  const auto& comps = m.components();
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      double d = std::abs(comps[i].mean - comps[j].mean);
      if (d <= 0.0) continue;
      double var = std::min(comps[i].variance, comps[j].variance);
      h = std::min(h, var / d / 6.0);
    }
  return h;
}

PassResult trapezoid_pass(
    const GaussianMixture& m, int max_rho_index, int n_out, double h,
    const QuadratureConfig& cfg,
    const std::function<void(double, double, const double*, double*)>& integrand) {
  PassResult res;
  res.values.assign(n_out, 0.0);
  res.term_l1.assign(n_out, 0.0);

  double log_fmax = -std::numeric_limits<double>::infinity();
  for (const auto& c : m.components())
    log_fmax = std::max(log_fmax, m.log_pdf(c.mean));
  const double log_cut = log_fmax + std::log(cfg.tail_cutoff_ratio);

  const double span = 16.0 * m.max_sigma();
  const double lo = m.min_mean() - span;
  const double hi = m.max_mean() + span;
  const long n = static_cast<long>(std::ceil((hi - lo) / h)) + 1;

  std::vector<double> rho(std::max(max_rho_index, 1));
  std::vector<double> out(n_out);
  for (long i = 0; i < n; ++i) {
    const double y = lo + h * static_cast<double>(i);
    double log_f;
    m.score_ratios(y, max_rho_index, &log_f, rho.data());
    if (log_f < log_cut) {
      res.cutoff_mass += std::exp(log_f) * h;
      continue;
    }
    const double fw = std::exp(log_f) * h;
    integrand(y, log_f, rho.data(), out.data());
    for (int k = 0; k < n_out; ++k) {
      double t = fw * out[k];
      res.values[k] += t;
      res.term_l1[k] += std::abs(t);
    }
  }
  return res;
}

std::vector<EvalResult> integrate_mixture(
    const GaussianMixture& m, int max_rho_index, int n_out,
    const QuadratureConfig& cfg,
    const std::function<void(double, double, const double*, double*)>& integrand) {
  cfg.validate();
  const bool single = m.size() == 1;
  int points = cfg.points_per_component;
  double h = trapezoid_spacing(m, points);
  PassResult prev = single
                        ? quadrature_pass(m, max_rho_index, n_out, points, cfg, integrand)
                        : trapezoid_pass(m, max_rho_index, n_out, h, cfg, integrand);
  std::vector<EvalResult> out(n_out);
  std::vector<bool> settled(n_out, false);
  for (int d = 0; d < cfg.max_doublings; ++d) {
    points *= 2;
    h *= 0.5;
    PassResult next =
        single ? quadrature_pass(m, max_rho_index, n_out, points, cfg, integrand)
               : trapezoid_pass(m, max_rho_index, n_out, h, cfg, integrand);
    bool all = true;
    for (int k = 0; k < n_out; ++k) {
      double delta = std::abs(next.values[k] - prev.values[k]);
      double scale = std::max(std::abs(next.values[k]), std::abs(prev.values[k]));
      // Converged when the refinement stops moving the estimate, or when
      // the movement is at the roundoff floor of the accumulation.
      settled[k] = delta <= cfg.relative_tolerance * scale + 1e-300 ||
                   delta <= 64.0 * std::numeric_limits<double>::epsilon() * next.term_l1[k];
      all = all && settled[k];
    }
    prev = std::move(next);
    if (all) break;
  }
  for (int k = 0; k < n_out; ++k) {
    out[k].value = prev.values[k];
    out[k].converged = settled[k];
    out[k].cutoff_mass = prev.cutoff_mass;
  }
  return out;
}

// Compiled form of a MomentExpr for fast node evaluation.
struct CompiledExpr {
  struct Term {
    double coeff;
    std::vector<std::pair<int, int>> powers;  // (rho index, exponent)
  };
  std::vector<Term> terms;
  int max_index = 0;

  explicit CompiledExpr(const MomentExpr& e) {
    for (const auto& [mono, c] : e.terms()) {
      Term t;
      t.coeff = mpq_get_d(c.get_mpq_t());
      for (int i = 1; i <= mono.max_index(); ++i)
        if (int a = mono.exponent(i); a > 0) {
          t.powers.emplace_back(i, a);
          max_index = std::max(max_index, i);
        }
      terms.push_back(std::move(t));
    }
  }

  double eval(const double* rho) const {
    double sum = 0.0;
    for (const auto& t : terms) {
      double prod = t.coeff;
      for (auto [idx, exp] : t.powers) {
        double base = rho[idx - 1];
        for (int k = 0; k < exp; ++k) prod *= base;
      }
      sum += prod;
    }
    return sum;
  }
};

}  // namespace

EvalResult entropy(const GaussianMixture& m, const QuadratureConfig& cfg) {
  auto res = integrate_mixture(
      m, 1, 1, cfg,
      [](double, double log_f, const double*, double* out) { out[0] = -log_f; });
  return res[0];
}

EvalResult entropy(const DensityGrid& g) {
  const auto& f = g.values();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] <= 0.0) continue;
    double w = (i == 0 || i + 1 == f.size()) ? 0.5 : 1.0;
    s -= w * f[i] * std::log(f[i]);
  }
  return {s * g.spacing(), true, 0.0};
}

EvalResult fisher(const GaussianMixture& m, const QuadratureConfig& cfg) {
  auto res = integrate_mixture(
      m, 1, 1, cfg,
      [](double, double, const double* rho, double* out) { out[0] = rho[0] * rho[0]; });
  return res[0];
}

namespace {

// Score ratios r_1..r_4 on a grid interior point by central differences.
// Index 1,2 are O(h^2); 3,4 use the standard 5-point stencils.
void grid_score_ratios(const std::vector<double>& f, std::size_t i, double h,
                       int max_index, double* rho) {
  double fi = f[i];
  double h2 = h * h;
  if (max_index >= 1) rho[0] = (f[i + 1] - f[i - 1]) / (2.0 * h) / fi;
  if (max_index >= 2) rho[1] = (f[i + 1] - 2.0 * fi + f[i - 1]) / h2 / fi;
  if (max_index >= 3)
    rho[2] = (f[i + 2] - 2.0 * f[i + 1] + 2.0 * f[i - 1] - f[i - 2]) / (2.0 * h * h2) / fi;
  if (max_index >= 4)
    rho[3] = (f[i + 2] - 4.0 * f[i + 1] + 6.0 * fi - 4.0 * f[i - 1] + f[i - 2]) /
             (h2 * h2) / fi;
}

EvalResult integrate_grid(const DensityGrid& g, int max_rho_index,
                          const QuadratureConfig& cfg,
                          const std::function<double(const double*)>& integrand) {
  cfg.validate();
  if (max_rho_index > 4)
    throw InvalidArgument("grid densities support score ratios up to r_4; r_" +
                          std::to_string(max_rho_index) + " was requested");
  const auto& f = g.values();
  const double h = g.spacing();
  double fmax = *std::max_element(f.begin(), f.end());
  const double cut = cfg.tail_cutoff_ratio * fmax;
  // finite-difference ratios blow up below roundoff; keep a floor
  const double floor_cut = std::max(cut, 1e-13 * fmax);

  EvalResult res;
  double rho[4] = {0, 0, 0, 0};
  const std::size_t margin = max_rho_index >= 3 ? 2 : 1;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i < margin || i + margin >= f.size()) continue;
    if (f[i] < floor_cut) {
      res.cutoff_mass += f[i] * h;
      continue;
    }
    grid_score_ratios(f, i, h, max_rho_index, rho);
    res.value += f[i] * integrand(rho) * h;
  }
  return res;
}

}  // namespace

EvalResult fisher(const DensityGrid& g, const QuadratureConfig& cfg) {
  return integrate_grid(g, 1, cfg, [](const double* r) { return r[0] * r[0]; });
}

std::vector<EvalResult> moment_eval_many(std::span<const MomentExpr> exprs,
                                         const GaussianMixture& m,
                                         const QuadratureConfig& cfg) {
  std::vector<CompiledExpr> compiled;
  compiled.reserve(exprs.size());
  int max_index = 1;
  for (const auto& e : exprs) {
    compiled.emplace_back(e);
    max_index = std::max(max_index, compiled.back().max_index);
  }
  const int n_out = static_cast<int>(exprs.size());
  return integrate_mixture(
      m, max_index, n_out, cfg,
      [&compiled, n_out](double, double, const double* rho, double* out) {
        for (int k = 0; k < n_out; ++k) out[k] = compiled[k].eval(rho);
      });
}

EvalResult moment_eval(const MomentExpr& e, const GaussianMixture& m,
                       const QuadratureConfig& cfg) {
  return moment_eval_many(std::span<const MomentExpr>(&e, 1), m, cfg)[0];
}

EvalResult moment_eval(const MomentExpr& e, const DensityGrid& g,
                       const QuadratureConfig& cfg) {
  CompiledExpr c(e);
  return integrate_grid(g, std::max(c.max_index, 1), cfg,
                        [&c](const double* rho) { return c.eval(rho); });
}

namespace {

double sq(double x) { return x * x; }

// The explicit integrands of the second, third and fourth entropy
// derivatives. The leading 1/2 scales the whole integrand, remainders
// included.
double paper_integrand(int n, const double* r) {
  switch (n) {
    case 2:
      return -0.5 * sq(r[1] - r[0] * r[0]);
    case 3: {
      double r1 = r[0], r2 = r[1], r3 = r[2];
      double square = sq(r3 - r1 * r2 + r1 * r1 * r1 / 3.0);
      double rem = std::pow(r1, 6) / 45.0;
      return 0.5 * (square + rem);
    }
    case 4: {
      double r1 = r[0], r2 = r[1], r3 = r[2], r4 = r[3];
      double r1sq = r1 * r1;
      double s1 = r4 - 1.2 * r1 * r3 - 0.7 * r2 * r2 + 1.6 * r1sq * r2 -
                  0.5 * r1sq * r1sq;
      double s2 = 0.4 * r1 * r3 - r1sq * r2 / 3.0 + 0.09 * r1sq * r1sq;
      double s3 = -0.04 * r1sq * r2 + 0.04 * r1sq * r1sq;
      double rem = std::pow(r2, 4) / 300.0 +
                   (56.0 / 90000.0) * r1sq * r1sq * r2 * r2 +
                   (13.0 / 70000.0) * std::pow(r1, 8);
      return -0.5 * (sq(s1) + sq(s2) + sq(s3) + rem);
    }
    default:
      throw InvalidArgument("paper_derivative is defined for orders 2, 3, 4");
  }
}

}  // namespace

EvalResult paper_derivative(int n, const GaussianMixture& m,
                            const QuadratureConfig& cfg) {
  if (n < 2 || n > 4) throw InvalidArgument("paper_derivative is defined for orders 2, 3, 4");
  auto res = integrate_mixture(m, n, 1, cfg,
                               [n](double, double, const double* rho, double* out) {
                                 out[0] = paper_integrand(n, rho);
                               });
  return res[0];
}

EvalResult paper_derivative(int n, const DensityGrid& g, const QuadratureConfig& cfg) {
  if (n < 2 || n > 4) throw InvalidArgument("paper_derivative is defined for orders 2, 3, 4");
  return integrate_grid(g, n, cfg, [n](const double* rho) { return paper_integrand(n, rho); });
}

double epi_gap(const GaussianMixture& a, const GaussianMixture& b,
               const QuadratureConfig& cfg) {
  GaussianMixture sum = convolve(a, b);
  double ha = entropy(a, cfg).value;
  double hb = entropy(b, cfg).value;
  double hs = entropy(sum, cfg).value;
  return std::exp(2.0 * hs) - std::exp(2.0 * ha) - std::exp(2.0 * hb);
}

double epi_gap(const DensityGrid& a, const DensityGrid& b) {
  DensityGrid sum = convolve(a, b);
  double ha = entropy(a).value;
  double hb = entropy(b).value;
  double hs = entropy(sum).value;
  return std::exp(2.0 * hs) - std::exp(2.0 * ha) - std::exp(2.0 * hb);
}

LaplaceResult laplace_forward(std::span<const double> mu_samples, double spacing,
                              double t, double atom_at_zero) {
  if (!(t > 0.0)) throw InvalidArgument("laplace_forward requires t > 0");
  if (!(spacing > 0.0)) throw InvalidArgument("sample spacing must be positive");
  if (mu_samples.size() < 3) throw InvalidArgument("need at least three samples");
  if (atom_at_zero < 0.0) throw InvalidArgument("point mass at zero must be >= 0");
  double peak = 0.0;
  for (std::size_t j = 0; j < mu_samples.size(); ++j) {
    if (mu_samples[j] < 0.0)
      throw InvalidArgument("representing density samples must be >= 0");
    peak = std::max(peak, mu_samples[j]);
  }

  auto g = [&](std::size_t j) {
    return std::exp(-spacing * static_cast<double>(j) * t) * mu_samples[j];
  };
  // composite Simpson; a trailing trapezoid panel if the interval count is odd
  std::size_t n = mu_samples.size() - 1;
  std::size_t even_end = (n % 2 == 0) ? n : n - 1;
  double s = 0.0;
  for (std::size_t j = 0; j + 2 <= even_end; j += 2)
    s += (g(j) + 4.0 * g(j + 1) + g(j + 2)) * spacing / 3.0;
  if (even_end != n) s += 0.5 * (g(n - 1) + g(n)) * spacing;

  LaplaceResult res;
  res.value = s + atom_at_zero;
  res.truncated = peak > 0.0 && mu_samples.back() > 1e-12 * peak;
  return res;
}

double capacity(double power, double noise) {
  if (!(power > 0.0) || !(noise > 0.0))
    throw InvalidArgument("capacity requires positive power and noise");
  return 0.5 * std::log1p(power / noise);
}

}  // namespace gcmc
