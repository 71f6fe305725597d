#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Written directly from the definitions, without sharing code with the library.

#include "ars/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

// Power iteration on the dense Google matrix.
inline std::vector<double> dense_pagerank(const ars::WeightedDigraph& g, double damping, double tol = 1e-15,
                                          int max_iter = 100000) {
  const auto& nodes = g.nodes();
  const std::size_t n = nodes.size();
  auto idx = [&](std::int64_t id) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), id) - nodes.begin());
  };
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges()) {
    w[idx(e.src)][idx(e.dst)] += e.weight;
    if (g.orientation() == ars::Orientation::undirected) w[idx(e.dst)][idx(e.src)] += e.weight;
  }
  // G[v][u]: probability of stepping u -> v
  std::vector<std::vector<double>> G(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    const double out = std::accumulate(w[u].begin(), w[u].end(), 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      const double step = out > 0 ? w[u][v] / out : 1.0 / static_cast<double>(n);
      G[v][u] = damping * step + (1.0 - damping) / static_cast<double>(n);
    }
  }
  std::vector<double> x(n, 1.0 / static_cast<double>(n)), y(n);
  for (int it = 0; it < max_iter; ++it) {
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      long double s = 0.0L;
      for (std::size_t u = 0; u < n; ++u) s += static_cast<long double>(G[v][u]) * x[u];
      y[v] = static_cast<double>(s);
      diff += std::abs(y[v] - x[v]);
    }
    x.swap(y);
    if (diff < tol) break;
  }
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  for (double& v : x) v /= total;
  return x;
}

inline ars::WeightedDigraph random_graph(std::mt19937_64& rng, int n, double density, ars::Orientation o) {
  std::vector<std::int64_t> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back(3 * i + 5);
  std::bernoulli_distribution keep(density);
  std::uniform_real_distribution<double> weight(0.5, 5.0);
  std::vector<ars::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || (o == ars::Orientation::undirected && j < i)) continue;
      if (keep(rng)) edges.push_back({nodes[i], nodes[j], std::round(weight(rng))});
    }
  }
  return {o, nodes, edges};
}

inline long double dot(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    }
    if (std::abs(A[piv][col]) < 1e-300) throw std::runtime_error("singular");
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      for (std::size_t k = col; k < n; ++k) A[r][k] -= f * A[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

// Average ranks (1-based), ties share their mean rank.
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + j - 1) / 2.0) + 1.0;
    for (std::size_t k = i; k < j; ++k) r[order[k]] = mean_rank;
    i = j;
  }
  return r;
}

inline double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

} // namespace oracle
