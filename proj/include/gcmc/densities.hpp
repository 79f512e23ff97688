#pragma once

#include <string>
#include <vector>

namespace gcmc {

struct GaussianComponent {
  double weight;    // > 0
  double mean;
  double variance;  // > 0
};

// Finite mixture of Gaussians; the analytic density family closed under
// heat flow. Weights are renormalized to sum exactly to 1 on
// construction; nonpositive weights or variances are rejected.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);
  static GaussianMixture gaussian(double mean, double variance);

  // Text format: one component per line "weight mean variance";
  // blank lines and '#' comments are ignored.
  static GaussianMixture parse(const std::string& text);
  std::string str() const;

  const std::vector<GaussianComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

  double min_sigma() const;
  double max_sigma() const;
  double min_mean() const;
  double max_mean() const;

  double pdf(double y) const;
  double log_pdf(double y) const;

  // f_0 .. f_max_order at y, exact analytic derivatives through the
  // probabilists' Hermite formula d^i/dy^i N = (-1/sigma)^i He_i(z) N.
  std::vector<double> pdf_derivatives(double y, int max_order) const;

  // Score ratios r_i = f_i/f for i = 1..max_order (out[0] = r_1), and the
  // log-density. Evaluated through per-component softmax weights so it is
  // stable far into the tails where f itself underflows.
  void score_ratios(double y, int max_order, double* log_f, double* out) const;

 private:
  std::vector<GaussianComponent> components_;
};

// Adds independent N(0,t) noise: same weights and means, variances
// shifted by t. Heat flow is forward-only; t < 0 is rejected.
GaussianMixture evolve(const GaussianMixture& m, double t);

// Convolution of two mixtures is again a mixture (pairwise products of
// weights, summed means and variances).
GaussianMixture convolve(const GaussianMixture& a, const GaussianMixture& b);

// Uniformly sampled density on an interval. Values are renormalized to
// unit trapezoid mass on construction; negative samples are rejected.
class DensityGrid {
 public:
  DensityGrid(double origin, double spacing, std::vector<double> values);

  double origin() const { return origin_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double point(std::size_t i) const { return origin_ + spacing_ * static_cast<double>(i); }

  double mass() const;  // trapezoid mass (1 after construction)

  // CSV "y,f" with a header line.
  static DensityGrid parse_csv(const std::string& text);
  std::string to_csv() const;

 private:
  double origin_;
  double spacing_;
  std::vector<double> values_;
};

// Samples an analytic mixture on a uniform grid. Defaults resolve the
// narrowest component with >= 40 points per standard deviation and
// extend 12 standard deviations past the extreme means.
DensityGrid sample_mixture(const GaussianMixture& m, double spacing = 0.0,
                           double halfwidth_sigmas = 12.0);

// Discrete convolution with a sampled N(0,t) kernel on the same grid.
// Rejects kernels wider than the grid and inputs whose boundary mass
// leaks more than 1e-6 (the error message suggests extending support).
DensityGrid heat_evolve_grid(const DensityGrid& g, double t);

// Density of the sum of two independent grid densities; spacings must
// match, support is the sum of supports.
DensityGrid convolve(const DensityGrid& a, const DensityGrid& b);

}  // namespace gcmc
