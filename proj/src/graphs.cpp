#include "ars/graphs.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace ars {

namespace {

using IdPair = std::pair<std::int64_t, std::int64_t>;

// Sorts the pair list and turns runs of equal pairs into weighted edges.
std::vector<Edge> count_pairs(std::vector<IdPair>& pairs) {
  std::sort(pairs.begin(), pairs.end());
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j] == pairs[i]) ++j;
    edges.push_back({pairs[i].first, pairs[i].second, static_cast<double>(j - i)});
    i = j;
  }
  return edges;
}

std::vector<std::int64_t> incident_nodes(const std::vector<Edge>& edges) {
  std::vector<std::int64_t> nodes;
  nodes.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    nodes.push_back(e.src);
    nodes.push_back(e.dst);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

} // namespace

WeightedDigraph::WeightedDigraph(Orientation orientation, std::vector<std::int64_t> nodes, std::vector<Edge> edges)
    : orientation_(orientation), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  for (auto& e : edges_) {
    if (e.src == e.dst) throw std::invalid_argument("self-loop on node " + std::to_string(e.src));
    if (!(e.weight > 0.0)) throw std::invalid_argument("edge weights must be positive");
    if (orientation_ == Orientation::undirected && e.src > e.dst) std::swap(e.src, e.dst);
    if (!node_index(e.src) || !node_index(e.dst)) throw std::invalid_argument("edge references unknown node");
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].src == edges_[i - 1].src && edges_[i].dst == edges_[i - 1].dst) {
      throw std::invalid_argument("duplicate edge " + std::to_string(edges_[i].src) + "-" +
                                  std::to_string(edges_[i].dst));
    }
  }
}

std::optional<std::size_t> WeightedDigraph::node_index(std::int64_t id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

double WeightedDigraph::total_weight() const {
  double w = 0.0;
  for (const auto& e : edges_) w += e.weight;
  return w;
}

std::string WeightedDigraph::to_csv() const {
  std::string out = "src,dst,weight\n";
  for (const auto& e : edges_) out += fmt::format("{},{},{}\n", e.src, e.dst, e.weight);
  return out;
}

WeightedDigraph build_acn(const CorpusSnapshot& snap) {
  const auto& corpus = snap.corpus();
  std::vector<IdPair> pairs;
  std::vector<std::int64_t> nodes;
  for (std::size_t i : snap.papers()) {
    const auto& authors = corpus.paper(i).authors;
    nodes.insert(nodes.end(), authors.begin(), authors.end());
    for (std::size_t x = 0; x < authors.size(); ++x) {
      for (std::size_t y = x + 1; y < authors.size(); ++y) {
        pairs.emplace_back(std::min(authors[x], authors[y]), std::max(authors[x], authors[y]));
      }
    }
  }
  return {Orientation::undirected, std::move(nodes), count_pairs(pairs)};
}

WeightedDigraph build_accn(const CorpusSnapshot& snap) {
  const auto& corpus = snap.corpus();
  std::vector<IdPair> pairs;
  for (std::size_t citing : snap.papers()) {
    for (std::size_t cited : corpus.resolved_refs(citing)) {
      if (!snap.includes(cited)) continue;
      for (AuthorId a : corpus.paper(citing).authors) {
        for (AuthorId b : corpus.paper(cited).authors) {
          if (a != b) pairs.emplace_back(a, b);
        }
      }
    }
  }
  auto edges = count_pairs(pairs);
  auto nodes = incident_nodes(edges);
  return {Orientation::directed, std::move(nodes), std::move(edges)};
}

std::uint64_t accn_dropped_self_pairs(const CorpusSnapshot& snap) {
  const auto& corpus = snap.corpus();
  std::uint64_t dropped = 0;
  for (std::size_t citing : snap.papers()) {
    for (std::size_t cited : corpus.resolved_refs(citing)) {
      if (!snap.includes(cited)) continue;
      for (AuthorId a : corpus.paper(citing).authors) {
        for (AuthorId b : corpus.paper(cited).authors) dropped += (a == b) ? 1 : 0;
      }
    }
  }
  return dropped;
}

WeightedDigraph build_vccn(const CorpusSnapshot& snap) {
  const auto& corpus = snap.corpus();
  std::vector<IdPair> pairs;
  for (std::size_t citing : snap.papers()) {
    const auto& u = corpus.paper(citing).venue;
    if (!u) continue;
    for (std::size_t cited : corpus.resolved_refs(citing)) {
      if (!snap.includes(cited)) continue;
      const auto& v = corpus.paper(cited).venue;
      if (v && *u != *v) pairs.emplace_back(*u, *v);
    }
  }
  auto edges = count_pairs(pairs);
  auto nodes = incident_nodes(edges);
  return {Orientation::directed, std::move(nodes), std::move(edges)};
}

double PageRankScores::score(std::int64_t id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
  if (it == nodes.end() || *it != id) return 0.0;
  return scores[static_cast<std::size_t>(it - nodes.begin())];
}

PageRankScores pagerank(const WeightedDigraph& graph, const PageRankOptions& options) {
  if (!(options.damping > 0.0 && options.damping < 1.0)) throw std::invalid_argument("damping must be in (0,1)");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  PageRankScores result;
  result.nodes = graph.nodes();
  const std::size_t n = result.nodes.size();
  if (n == 0) return result;

  struct Arc {
    std::size_t from;
    double weight;
  };
  std::vector<double> out_weight(n, 0.0);
  std::vector<std::vector<Arc>> incoming(n);
  auto add_arc = [&](std::size_t u, std::size_t v, double w) {
    out_weight[u] += w;
    incoming[v].push_back({u, w});
  };
  for (const auto& e : graph.edges()) {
    std::size_t u = *graph.node_index(e.src);
    std::size_t v = *graph.node_index(e.dst);
    add_arc(u, v, e.weight);
    if (graph.orientation() == Orientation::undirected) add_arc(v, u, e.weight);
  }
  for (auto& in : incoming) {
    for (auto& arc : in) arc.weight /= out_weight[arc.from];
  }

  const double d = options.damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> x(n, inv_n), next(n);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (out_weight[u] == 0.0) dangling += x[u];
    }
    const double base = (1.0 - d) * inv_n + d * dangling * inv_n;
    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double s = 0.0;
      for (const auto& arc : incoming[v]) s += x[arc.from] * arc.weight;
      next[v] = base + d * s;
      delta += std::abs(next[v] - x[v]);
    }
    x.swap(next);
    result.iterations = iter;
    if (delta < options.tol) break;
  }
  // Renormalize away accumulated rounding.
  double total = 0.0;
  for (double v : x) total += v;
  for (double& v : x) v /= total;
  result.scores = std::move(x);
  return result;
}

} // namespace ars
