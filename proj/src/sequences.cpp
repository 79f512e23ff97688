#include "gcmc/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gcmc/errors.hpp"

namespace gcmc {

using json = nlohmann::ordered_json;

Graph::Graph(int vertex_count, std::vector<std::pair<int, int>> edges)
    : n_(vertex_count) {
  if (n_ < 1) throw InvalidArgument("graph needs at least one vertex");
  for (auto& [u, v] : edges) {
    if (u == v) throw InvalidArgument("self-loop at vertex " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n_ || v >= n_)
      throw InvalidArgument("edge endpoint out of range: " + std::to_string(u) +
                            " " + std::to_string(v));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  auto dup = std::adjacent_find(edges.begin(), edges.end());
  if (dup != edges.end())
    throw InvalidArgument("duplicate edge " + std::to_string(dup->first) + " " +
                          std::to_string(dup->second));
  edges_ = std::move(edges);
}

Graph Graph::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (n < 0) {
      if (ls >> n) continue;
      continue;  // still looking for the header
    }
    int u, v;
    if (!(ls >> u)) continue;
    if (!(ls >> v))
      throw ParseError("graph line " + std::to_string(lineno) +
                       ": expected 'u v' pair");
    edges.emplace_back(u, v);
  }
  if (n < 0) throw ParseError("graph file is missing the vertex count");
  return Graph(n, std::move(edges));
}

SequenceProfile sequence_profile(std::span<const double> seq) {
  SequenceProfile p;
  p.values.assign(seq.begin(), seq.end());
  for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
    double lhs = seq[i] * seq[i];
    double rhs = seq[i - 1] * seq[i + 1];
    double margin = lhs - rhs;
    double tol = 1e-12 * std::max(std::abs(lhs), std::abs(rhs));
    p.concavity_margins.push_back(margin);
    if (margin < -tol) p.log_concave = false;
    if (margin > tol) p.log_convex = false;
  }
  return p;
}

std::string SequenceProfile::to_json() const {
  json j;
  j["schemaVersion"] = 1;
  j["kind"] = "sequence-profile";
  j["values"] = values;
  j["concavityMargins"] = concavity_margins;
  j["logConcave"] = log_concave;
  j["logConvex"] = log_convex;
  return j.dump(2);
}

RationalSequenceProfile sequence_profile_exact(std::span<const Rational> seq) {
  RationalSequenceProfile p;
  for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
    Rational lhs = seq[i] * seq[i];
    Rational rhs = seq[i - 1] * seq[i + 1];
    if (lhs < rhs) p.log_concave = false;
    if (lhs > rhs) p.log_convex = false;
  }
  return p;
}

namespace {

// canonical key after relabeling: vertex count + sorted edges
using GraphKey = std::pair<int, std::vector<std::pair<int, int>>>;

std::vector<mpz_class> add_poly(const std::vector<mpz_class>& a,
                                const std::vector<mpz_class>& b, bool subtract) {
  std::vector<mpz_class> out(std::max(a.size(), b.size()), mpz_class(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i)
    out[i] += subtract ? mpz_class(-b[i]) : b[i];
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

std::vector<mpz_class> chromatic_rec(int n, std::vector<std::pair<int, int>> edges,
                                     std::map<GraphKey, std::vector<mpz_class>>& memo) {
  if (edges.empty()) {
    // q^n
    std::vector<mpz_class> coeffs(n + 1, mpz_class(0));
    coeffs[n] = 1;
    return coeffs;
  }
  std::sort(edges.begin(), edges.end());
  GraphKey key{n, edges};
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  auto [u, v] = edges.back();
  // deletion
  std::vector<std::pair<int, int>> del(edges.begin(), edges.end() - 1);
  std::vector<mpz_class> chi_del = chromatic_rec(n, del, memo);

  // contraction: merge v into u, relabel to 0..n-2, drop parallels
  std::vector<std::pair<int, int>> con;
  for (auto [a, b] : del) {
    if (a == v) a = u;
    if (b == v) b = u;
    if (a == b) continue;
    if (a > v) --a;
    if (b > v) --b;
    if (a > b) std::swap(a, b);
    con.emplace_back(a, b);
  }
  std::sort(con.begin(), con.end());
  con.erase(std::unique(con.begin(), con.end()), con.end());
  std::vector<mpz_class> chi_con = chromatic_rec(n - 1, con, memo);

  std::vector<mpz_class> result = add_poly(chi_del, chi_con, /*subtract=*/true);
  memo.emplace(std::move(key), result);
  return result;
}

}  // namespace

std::vector<mpz_class> chromatic_polynomial(const Graph& g) {
  if (g.edge_count() > static_cast<std::size_t>(kChromaticEdgeCap))
    throw InvalidArgument("graph has " + std::to_string(g.edge_count()) +
                          " edges; deletion-contraction is capped at " +
                          std::to_string(kChromaticEdgeCap) + " edges");
  std::map<GraphKey, std::vector<mpz_class>> memo;
  return chromatic_rec(g.vertex_count(), g.edges(), memo);
}

mpz_class count_proper_colorings(const Graph& g, int q) {
  if (q < 0) throw InvalidArgument("color count must be >= 0");
  const int n = g.vertex_count();
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : g.edges()) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<int> color(n, -1);
  mpz_class count = 0;
  auto rec = [&](auto&& self, int vertex) -> void {
    if (vertex == n) {
      ++count;
      return;
    }
    for (int c = 0; c < q; ++c) {
      bool ok = true;
      for (int w : adj[vertex])
        if (color[w] == c) {
          ok = false;
          break;
        }
      if (!ok) continue;
      color[vertex] = c;
      self(self, vertex + 1);
      color[vertex] = -1;
    }
  };
  rec(rec, 0);
  return count;
}

mpz_class evaluate_polynomial(std::span<const mpz_class> coeffs, int q) {
  mpz_class acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * q + coeffs[i];
  return acc;
}

double binary_entropy(double p) {
  if (!(p >= 0.0) || !(p <= 1.0))
    throw InvalidArgument("binary_entropy argument must lie in [0,1]");
  double s = 0.0;
  if (p > 0.0) s -= p * std::log2(p);
  if (p < 1.0) s -= (1.0 - p) * std::log2(1.0 - p);
  return s;
}

double binary_entropy_inv(double x) {
  if (!(x >= 0.0) || !(x <= 1.0))
    throw InvalidArgument("binary_entropy_inv argument must lie in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 0.5;
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double val = binary_entropy(mid);
    if (std::abs(val - x) <= 1e-14 || hi - lo < 1e-16) return mid;
    if (val < x)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double binary_convolve(double p, double q) {
  if (!(p >= 0.0) || !(p <= 1.0) || !(q >= 0.0) || !(q <= 1.0))
    throw InvalidArgument("binary_convolve arguments must lie in [0,1]");
  return p * (1.0 - q) + (1.0 - p) * q;
}

ConvexityReport mgl_scan(double p, std::span<const double> g_values,
                         std::span<const double> x_grid) {
  if (!(p >= 0.0) || !(p <= 1.0))
    throw InvalidArgument("mgl_scan channel parameter must lie in [0,1]");
  if (g_values.size() != x_grid.size())
    throw InvalidArgument("mgl_scan: g and x grids must have equal length");
  if (x_grid.size() < 3) throw InvalidArgument("mgl_scan needs at least 3 grid points");
  const double h = x_grid[1] - x_grid[0];
  if (!(h > 0.0)) throw InvalidArgument("mgl_scan grid must be increasing");
  for (std::size_t i = 1; i + 1 < x_grid.size(); ++i)
    if (std::abs((x_grid[i + 1] - x_grid[i]) - h) > 1e-9 * std::max(1.0, h))
      throw InvalidArgument("mgl_scan grid must be uniform");
  for (double g : g_values)
    if (!(g >= 0.0) || !(g <= 1.0))
      throw InvalidArgument("mgl_scan: g(x) must map into [0,1]");

  std::vector<double> phi(g_values.size());
  for (std::size_t i = 0; i < g_values.size(); ++i)
    phi[i] = binary_entropy(binary_convolve(p, g_values[i]));

  ConvexityReport rep;
  rep.p = p;
  rep.min_second_difference = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < phi.size(); ++i) {
    double d2 = phi[i + 1] - 2.0 * phi[i] + phi[i - 1];
    if (d2 < rep.min_second_difference) {
      rep.min_second_difference = d2;
      rep.argmin = i;
    }
  }
  rep.convex = rep.min_second_difference >= -1e-10;
  return rep;
}

std::string ConvexityReport::to_json() const {
  json j;
  j["schemaVersion"] = 1;
  j["kind"] = "mgl-convexity";
  j["p"] = p;
  j["minSecondDifference"] = min_second_difference;
  j["argmin"] = argmin;
  j["convex"] = convex;
  return j.dump(2);
}

}  // namespace gcmc
