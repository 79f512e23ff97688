#pragma once

#include <span>
#include <vector>

#include "gcmc/densities.hpp"
#include "gcmc/moments.hpp"

namespace gcmc {

struct QuadratureConfig {
  // Gauss-Hermite points per mixture component at the first convergence
  // level; doubled until the estimate settles.
  int points_per_component = 200;
  // Integrand dropped where f < ratio * max f. Score-ratio powers reach
  // f1^8/f^7, so the far tails need an explicit policy.
  double tail_cutoff_ratio = 1e-60;
  double relative_tolerance = 1e-10;
  int max_doublings = 3;

  void validate() const;
};

struct EvalResult {
  double value = 0.0;
  bool converged = true;
  // Integral of f over the nodes excluded by the tail cutoff.
  double cutoff_mass = 0.0;
};

struct GaussHermiteRule {
  std::vector<double> nodes;    // roots of H_n, ascending
  std::vector<double> weights;  // for integral e^{-x^2} g(x) dx
};

// Cached, thread-safe.
const GaussHermiteRule& gauss_hermite(int n);

// Differential entropy h = -int f log f (natural log).
EvalResult entropy(const GaussianMixture& m, const QuadratureConfig& cfg = {});
EvalResult entropy(const DensityGrid& g);

// Fisher information I = int f1^2 / f.
EvalResult fisher(const GaussianMixture& m, const QuadratureConfig& cfg = {});
EvalResult fisher(const DensityGrid& g, const QuadratureConfig& cfg = {});

// Numeric realization of E_f[.]: sum_m c_m int f prod r_i^{a_i} dy.
EvalResult moment_eval(const MomentExpr& e, const GaussianMixture& m,
                       const QuadratureConfig& cfg = {});
// Grid densities support score ratios up to r_4 (finite differences);
// higher indices are rejected naming the offending index.
EvalResult moment_eval(const MomentExpr& e, const DensityGrid& g,
                       const QuadratureConfig& cfg = {});

// Shares density evaluations across several expressions (the scan path).
std::vector<EvalResult> moment_eval_many(std::span<const MomentExpr> exprs,
                                         const GaussianMixture& m,
                                         const QuadratureConfig& cfg = {});

// d^n h/dt^n for n in {2,3,4} evaluated directly from the explicit
// sum-of-squares integrands, independent of the symbolic calculus.
EvalResult paper_derivative(int n, const GaussianMixture& m,
                            const QuadratureConfig& cfg = {});
EvalResult paper_derivative(int n, const DensityGrid& g,
                            const QuadratureConfig& cfg = {});

// e^{2h(a+b)} - e^{2h(a)} - e^{2h(b)}; nonnegative when the entropy power
// inequality holds. The mixture overload convolves analytically.
double epi_gap(const GaussianMixture& a, const GaussianMixture& b,
               const QuadratureConfig& cfg = {});
double epi_gap(const DensityGrid& a, const DensityGrid& b);

struct LaplaceResult {
  double value = 0.0;
  // Last sample still visibly above zero: the transform is truncated.
  bool truncated = false;
};

// int_0^inf e^{-xt} mu'(x) dx + atom_at_zero, with mu' sampled uniformly
// from x = 0 at `spacing`. Composite Simpson.
LaplaceResult laplace_forward(std::span<const double> mu_samples, double spacing,
                              double t, double atom_at_zero = 0.0);

// Gaussian channel capacity (1/2) log(1 + P/t), natural log.
double capacity(double power, double noise);

}  // namespace gcmc
