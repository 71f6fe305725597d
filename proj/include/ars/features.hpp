#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ars/corpus.hpp"
#include "ars/graphs.hpp"
#include "ars/topics.hpp"

namespace ars {

inline constexpr std::size_t kFeatureCount = 18;
using FeatureRow = std::array<double, kFeatureCount>;

/// "F1" ... "F18"
std::string feature_name(std::size_t column);

enum class FeatureGroup { author, social, venue, content, temporal };
inline constexpr std::array<FeatureGroup, 5> kFeatureGroups = {FeatureGroup::author, FeatureGroup::social,
                                                               FeatureGroup::venue, FeatureGroup::content,
                                                               FeatureGroup::temporal};
std::string_view group_name(FeatureGroup group);
/// Accepts "Author", "author", ...; throws on unknown names.
FeatureGroup parse_feature_group(std::string_view name);
/// Zero-based column indices of the group.
std::vector<std::size_t> group_columns(FeatureGroup group);

struct FeatureMatrix {
  std::vector<AuthorId> authors;  // ascending
  std::vector<FeatureRow> rows;
  bool transformed = false;

  std::size_t size() const { return rows.size(); }
  std::vector<double> column(std::size_t k) const;
  /// Row position of an author; throws if absent.
  std::size_t row_of(AuthorId author) const;

  bool operator==(const FeatureMatrix&) const = default;
};

/// Everything feature extraction reads, built once per snapshot year.
struct FeatureInputs {
  const Corpus* corpus = nullptr;
  int t = 0;
  const CorpusSnapshot* snap = nullptr;       // snapshot(corpus, t)
  const WeightedDigraph* acn = nullptr;
  const PageRankScores* pr_acn = nullptr;
  const PageRankScores* pr_accn = nullptr;
  const PageRankScores* pr_vccn = nullptr;
  const TopicModel* topics = nullptr;
};

/// (F1, F2, F3). Throws when the author has no papers in the snapshot.
std::array<double, 3> author_features(const CorpusSnapshot& snap, AuthorId author);

/// Co-author lists derived from an ACN, ascending per author.
using CoauthorIndex = std::unordered_map<AuthorId, std::vector<AuthorId>>;
CoauthorIndex coauthor_index(const WeightedDigraph& acn);

/// (F4 .. F9); PageRank values are rescaled by 1e6.
std::array<double, 6> social_features(const CorpusSnapshot& snap, const CoauthorIndex& coauthors,
                                      const PageRankScores& pr_acn, const PageRankScores& pr_accn, AuthorId author);

/// Mean snapshot citation count of each venue's snapshot papers.
std::unordered_map<VenueId, double> venue_citations(const CorpusSnapshot& snap);

/// (F10, F11, F12)
std::array<double, 3> venue_features(const CorpusSnapshot& snap, const std::unordered_map<VenueId, double>& venue_cit,
                                     const PageRankScores& pr_vccn, AuthorId author, int t);

/// (F13, F14). Throws when one of the author's snapshot papers is not modeled.
std::array<double, 2> content_features(const CorpusSnapshot& snap, const TopicModel& model, AuthorId author);

/// (F15 .. F18) from snapshots at t, t-1 and t-2.
std::array<double, 4> temporal_features(const Corpus& corpus, AuthorId author, int t);

/// Full 18-column matrix for the authors (sorted on output).
FeatureMatrix extract_features(const FeatureInputs& in, std::span<const AuthorId> authors);

/// ln(1 + f) on every cell. Throws if the matrix is already transformed.
FeatureMatrix log_transform(const FeatureMatrix& m);

/// CSV `author_id,F1,...,F18,transformed` with 6 significant digits.
std::string to_csv(const FeatureMatrix& m);
FeatureMatrix feature_matrix_from_csv(std::string_view text);

} // namespace ars
