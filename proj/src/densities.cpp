#include "gcmc/densities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "gcmc/errors.hpp"
#include "gcmc/moments.hpp"

namespace gcmc {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) throw InvalidArgument("mixture weights must be positive");
    if (!(c.variance > 0.0)) throw InvalidArgument("mixture variances must be positive");
    if (!std::isfinite(c.mean)) throw InvalidArgument("mixture means must be finite");
    total += c.weight;
  }
  for (auto& c : components_) c.weight /= total;
}

GaussianMixture GaussianMixture::gaussian(double mean, double variance) {
  return GaussianMixture({{1.0, mean, variance}});
}

GaussianMixture GaussianMixture::parse(const std::string& text) {
  std::vector<GaussianComponent> comps;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double w, mu, var;
    if (!(ls >> w)) continue;  // blank
    if (!(ls >> mu >> var))
      throw ParseError("mixture line " + std::to_string(lineno) +
                       ": expected 'weight mean variance'");
    double extra;
    if (ls >> extra)
      throw ParseError("mixture line " + std::to_string(lineno) + ": trailing fields");
    comps.push_back({w, mu, var});
  }
  if (comps.empty()) throw ParseError("mixture file has no components");
  return GaussianMixture(std::move(comps));
}

std::string GaussianMixture::str() const {
  std::string out;
  char buf[128];
  for (const auto& c : components_) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", c.weight, c.mean, c.variance);
    out += buf;
  }
  return out;
}

double GaussianMixture::min_sigma() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& c : components_) v = std::min(v, c.variance);
  return std::sqrt(v);
}

double GaussianMixture::max_sigma() const {
  double v = 0.0;
  for (const auto& c : components_) v = std::max(v, c.variance);
  return std::sqrt(v);
}

double GaussianMixture::min_mean() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& c : components_) v = std::min(v, c.mean);
  return v;
}

double GaussianMixture::max_mean() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& c : components_) v = std::max(v, c.mean);
  return v;
}

double GaussianMixture::log_pdf(double y) const {
  double best = -std::numeric_limits<double>::infinity();
  thread_local std::vector<double> logs;
  logs.clear();
  for (const auto& c : components_) {
    double z = (y - c.mean);
    double lg = std::log(c.weight) - 0.5 * z * z / c.variance -
                0.5 * (kLog2Pi + std::log(c.variance));
    logs.push_back(lg);
    best = std::max(best, lg);
  }
  double sum = 0.0;
  for (double lg : logs) sum += std::exp(lg - best);
  return best + std::log(sum);
}

double GaussianMixture::pdf(double y) const { return std::exp(log_pdf(y)); }

void GaussianMixture::score_ratios(double y, int max_order, double* log_f,
                                   double* out) const {
  thread_local std::vector<double> logs, w, he;
  const std::size_t k = components_.size();
  logs.resize(k);
  w.resize(k);

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const auto& c = components_[j];
    double z = y - c.mean;
    logs[j] = std::log(c.weight) - 0.5 * z * z / c.variance -
              0.5 * (kLog2Pi + std::log(c.variance));
    best = std::max(best, logs[j]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    w[j] = std::exp(logs[j] - best);
    sum += w[j];
  }
  for (std::size_t j = 0; j < k; ++j) w[j] /= sum;
  if (log_f) *log_f = best + std::log(sum);

  for (int i = 0; i < max_order; ++i) out[i] = 0.0;
  he.resize(max_order + 1);
  for (std::size_t j = 0; j < k; ++j) {
    if (w[j] == 0.0) continue;
    const auto& c = components_[j];
    double sigma = std::sqrt(c.variance);
    double z = (y - c.mean) / sigma;
    he[0] = 1.0;
    if (max_order >= 1) he[1] = z;
    for (int i = 1; i < max_order; ++i) he[i + 1] = z * he[i] - i * he[i - 1];
    double scale = 1.0;
    for (int i = 1; i <= max_order; ++i) {
      scale *= -1.0 / sigma;
      out[i - 1] += w[j] * scale * he[i];
    }
  }
}

std::vector<double> GaussianMixture::pdf_derivatives(double y, int max_order) const {
  if (max_order < 0) throw InvalidArgument("max_order must be >= 0");
  if (max_order > 2 * kDerivativeCap)
    throw InvalidArgument("pdf derivative order " + std::to_string(max_order) +
                          " exceeds 2*cap = " + std::to_string(2 * kDerivativeCap));
  std::vector<double> out(max_order + 1, 0.0);
  std::vector<double> he(max_order + 1);
  for (const auto& c : components_) {
    double sigma = std::sqrt(c.variance);
    double z = (y - c.mean) / sigma;
    double n = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    he[0] = 1.0;
    if (max_order >= 1) he[1] = z;
    for (int i = 1; i < max_order; ++i) he[i + 1] = z * he[i] - i * he[i - 1];
    double scale = 1.0;
    for (int i = 0; i <= max_order; ++i) {
      out[i] += c.weight * scale * he[i] * n;
      scale *= -1.0 / sigma;
    }
  }
  return out;
}

GaussianMixture evolve(const GaussianMixture& m, double t) {
  if (t < 0.0)
    throw InvalidArgument("heat flow is forward-only: evolve time must be >= 0");
  std::vector<GaussianComponent> comps = m.components();
  for (auto& c : comps) c.variance += t;
  return GaussianMixture(std::move(comps));
}

GaussianMixture convolve(const GaussianMixture& a, const GaussianMixture& b) {
  std::vector<GaussianComponent> comps;
  comps.reserve(a.size() * b.size());
  for (const auto& ca : a.components())
    for (const auto& cb : b.components())
      comps.push_back({ca.weight * cb.weight, ca.mean + cb.mean,
                       ca.variance + cb.variance});
  return GaussianMixture(std::move(comps));
}

DensityGrid::DensityGrid(double origin, double spacing, std::vector<double> values)
    : origin_(origin), spacing_(spacing), values_(std::move(values)) {
  if (!(spacing_ > 0.0)) throw InvalidArgument("grid spacing must be positive");
  if (values_.size() < 2) throw InvalidArgument("grid needs at least two samples");
  double raw = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] < 0.0) throw InvalidArgument("grid density samples must be >= 0");
    double w = (i == 0 || i + 1 == values_.size()) ? 0.5 : 1.0;
    raw += w * values_[i];
  }
  raw *= spacing_;
  if (!(raw > 0.0)) throw InvalidArgument("grid density has zero mass");
  for (double& v : values_) v /= raw;
}

double DensityGrid::mass() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double w = (i == 0 || i + 1 == values_.size()) ? 0.5 : 1.0;
    s += w * values_[i];
  }
  return s * spacing_;
}

DensityGrid DensityGrid::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> ys, fs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double y, f;
    if (!(ls >> y >> f)) continue;  // header or junk line
    ys.push_back(y);
    fs.push_back(f);
  }
  if (ys.size() < 2) throw ParseError("grid CSV needs at least two data rows");
  double h = ys[1] - ys[0];
  if (!(h > 0.0)) throw ParseError("grid CSV must have increasing y");
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
    double hi = ys[i + 1] - ys[i];
    if (std::abs(hi - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw ParseError("grid CSV must be uniformly spaced");
  }
  return DensityGrid(ys[0], h, std::move(fs));
}

std::string DensityGrid::to_csv() const {
  std::string out = "y,f\n";
  char buf[96];
  for (std::size_t i = 0; i < values_.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", point(i), values_[i]);
    out += buf;
  }
  return out;
}

DensityGrid sample_mixture(const GaussianMixture& m, double spacing,
                           double halfwidth_sigmas) {
  if (spacing == 0.0) spacing = m.min_sigma() / 40.0;
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
  double lo = m.min_mean() - halfwidth_sigmas * m.max_sigma();
  double hi = m.max_mean() + halfwidth_sigmas * m.max_sigma();
  std::size_t n = static_cast<std::size_t>(std::ceil((hi - lo) / spacing)) + 1;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = m.pdf(lo + spacing * static_cast<double>(i));
  return DensityGrid(lo, spacing, std::move(values));
}

DensityGrid heat_evolve_grid(const DensityGrid& g, double t) {
  if (!(t > 0.0)) throw InvalidArgument("heat flow time must be > 0");
  const double h = g.spacing();
  const double sigma = std::sqrt(t);
  const long radius = static_cast<long>(std::ceil(12.0 * sigma / h));
  const long n = static_cast<long>(g.size());
  if (radius >= n)
    throw SupportError(
        "heat kernel halfwidth (" + std::to_string(radius) +
        " samples) is wider than the grid (" + std::to_string(n) +
        " samples); extend the grid support before evolving");

  std::vector<double> kernel(2 * radius + 1);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  for (long j = -radius; j <= radius; ++j) {
    double x = static_cast<double>(j) * h;
    kernel[j + radius] = norm * std::exp(-0.5 * x * x / t);
  }

  const std::vector<double>& f = g.values();
  std::vector<double> out(n, 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    long j0 = std::max<long>(0, i - radius);
    long j1 = std::min<long>(n - 1, i + radius);
    for (long j = j0; j <= j1; ++j) acc += f[j] * kernel[i - j + radius];
    out[i] = acc * h;
  }

  double mass = 0.0;
  for (long i = 0; i < n; ++i) mass += out[i] * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
  mass *= h;
  if (std::abs(mass - 1.0) > 1e-6)
    throw SupportError("heat evolution lost " + std::to_string(1.0 - mass) +
                       " probability mass over the grid boundary; extend the "
                       "grid support");
  return DensityGrid(g.origin(), h, std::move(out));
}

DensityGrid convolve(const DensityGrid& a, const DensityGrid& b) {
  const double h = a.spacing();
  if (std::abs(h - b.spacing()) > 1e-12 * std::max(h, b.spacing()))
    throw InvalidArgument("convolve: grid spacings must match (resample first)");
  const auto& fa = a.values();
  const auto& fb = b.values();
  std::vector<double> out(fa.size() + fb.size() - 1, 0.0);
  for (std::size_t i = 0; i < fa.size(); ++i) {
    if (fa[i] == 0.0) continue;
    for (std::size_t j = 0; j < fb.size(); ++j) out[i + j] += fa[i] * fb[j];
  }
  for (double& v : out) v *= h;
  return DensityGrid(a.origin() + b.origin(), h, std::move(out));
}

}  // namespace gcmc
