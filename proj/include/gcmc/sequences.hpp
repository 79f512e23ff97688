#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gcmc/rational.hpp"

namespace gcmc {

// Simple undirected graph: no self-loops, no duplicate edges.
class Graph {
 public:
  Graph(int vertex_count, std::vector<std::pair<int, int>> edges);

  // First line is the vertex count, then one 0-indexed "u v" pair per
  // line; blank lines and '#' comments are ignored.
  static Graph parse(const std::string& text);

  int vertex_count() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;  // normalized u < v, sorted
};

struct SequenceProfile {
  std::vector<double> values;
  std::vector<double> concavity_margins;  // a_i^2 - a_{i-1} a_{i+1}
  bool log_concave = true;
  bool log_convex = true;

  std::string to_json() const;
};

// Tolerance-banded verdicts for float input; sequences shorter than 3
// are vacuously both.
SequenceProfile sequence_profile(std::span<const double> seq);

struct RationalSequenceProfile {
  bool log_concave = true;
  bool log_convex = true;
};

// Exact verdicts for rational input (used on chromatic coefficients).
RationalSequenceProfile sequence_profile_exact(std::span<const Rational> seq);

inline constexpr int kChromaticEdgeCap = 20;

// Chromatic polynomial coefficients by ascending power of q, exact
// integers via deletion-contraction with memoization on canonicalized
// graphs. Rejects graphs with more than kChromaticEdgeCap edges.
std::vector<mpz_class> chromatic_polynomial(const Graph& g);

// Brute-force proper-coloring count; the independent oracle for the
// polynomial (exponential in vertices, keep q and the graph small).
mpz_class count_proper_colorings(const Graph& g, int q);

mpz_class evaluate_polynomial(std::span<const mpz_class> coeffs, int q);

// Binary entropy in bits, H(1/2) = 1.
double binary_entropy(double p);
// Inverse branch on [0, 1/2], bisection to 1e-14.
double binary_entropy_inv(double x);
// p*q = p(1-q) + (1-p)q.
double binary_convolve(double p, double q);

struct ConvexityReport {
  double p = 0.0;
  double min_second_difference = 0.0;
  std::size_t argmin = 0;
  bool convex = false;

  std::string to_json() const;
};

// Second-difference scan of x -> H(p * g(x)) on a uniform grid; convex
// verdict with tolerance -1e-10 on the raw second differences.
ConvexityReport mgl_scan(double p, std::span<const double> g_values,
                         std::span<const double> x_grid);

}  // namespace gcmc
