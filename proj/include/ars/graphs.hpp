#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ars/corpus.hpp"

namespace ars {

struct Edge {
  std::int64_t src = 0;
  std::int64_t dst = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

enum class Orientation { directed, undirected };

/// Weighted graph over author or venue ids. Undirected graphs store each pair
/// once with src < dst. Edges are sorted by (src, dst); there are no
/// self-loops and all weights are positive.
class WeightedDigraph {
 public:
  WeightedDigraph(Orientation orientation, std::vector<std::int64_t> nodes, std::vector<Edge> edges);

  Orientation orientation() const { return orientation_; }
  const std::vector<std::int64_t>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::optional<std::size_t> node_index(std::int64_t id) const;
  double total_weight() const;

  /// Debug export: `src,dst,weight` lines with a header.
  std::string to_csv() const;

 private:
  Orientation orientation_;
  std::vector<std::int64_t> nodes_;  // ascending
  std::vector<Edge> edges_;
};

/// Co-authorship network: every author in the snapshot is a node.
WeightedDigraph build_acn(const CorpusSnapshot& snap);
/// Author citing-cited network; nodes are authors incident to at least one edge.
WeightedDigraph build_accn(const CorpusSnapshot& snap);
/// Venue citing-cited network; nodes are venues incident to at least one edge.
WeightedDigraph build_vccn(const CorpusSnapshot& snap);

/// Number of (citing author, cited author) combinations with the same author,
/// i.e. what build_accn discarded.
std::uint64_t accn_dropped_self_pairs(const CorpusSnapshot& snap);

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-12;
  int max_iter = 200;
};

struct PageRankScores {
  std::vector<std::int64_t> nodes;  // ascending, same order as the graph
  std::vector<double> scores;       // probabilities, sum to 1
  int iterations = 0;

  /// Score of a node, or 0 when the node is absent.
  double score(std::int64_t id) const;
};

/// Weighted PageRank by power iteration. Transition u->v is w(u,v)/sum_x w(u,x);
/// undirected edges are walked both ways; dangling mass spreads uniformly.
PageRankScores pagerank(const WeightedDigraph& graph, const PageRankOptions& options = {});

inline constexpr double kPageRankScale = 1e6;

} // namespace ars
