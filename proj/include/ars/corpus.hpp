#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ars/util.hpp"

namespace ars {

struct PaperRecord {
  PaperId id = 0;
  std::string title;
  std::string abstract;
  int year = 0;
  std::optional<VenueId> venue;
  std::vector<AuthorId> authors;  // position 0 is the first author
  std::vector<PaperId> refs;      // deduplicated, never contains id

  bool operator==(const PaperRecord&) const = default;
};

/// Immutable, cross-indexed publication corpus.
///
/// Papers keep their input order. Internally everything is addressed by the
/// paper's position ("paper index"); ids are only used at the edges.
class Corpus {
 public:
  Corpus() = default;
  /// Throws std::runtime_error on duplicate ids, empty author lists or
  /// references to papers published in a later year.
  explicit Corpus(std::vector<PaperRecord> papers);

  std::span<const PaperRecord> papers() const { return papers_; }
  std::size_t size() const { return papers_.size(); }
  const PaperRecord& paper(std::size_t index) const { return papers_[index]; }
  std::optional<std::size_t> index_of(PaperId id) const;

  /// Indices of papers in the corpus citing paper `index` (dangling refs excluded).
  std::span<const std::size_t> cited_by(std::size_t index) const { return cited_by_[index]; }
  /// Indices of the referenced papers present in the corpus.
  std::span<const std::size_t> resolved_refs(std::size_t index) const { return resolved_refs_[index]; }
  /// Paper indices of an author, ascending by year then input order. Empty for unknown ids.
  std::span<const std::size_t> papers_of(AuthorId author) const;
  /// All author ids, ascending.
  const std::vector<AuthorId>& authors() const { return author_ids_; }

  std::optional<int> min_year() const { return min_year_; }
  std::optional<int> max_year() const { return max_year_; }

  bool operator==(const Corpus& other) const { return papers_ == other.papers_; }

 private:
  std::vector<PaperRecord> papers_;
  std::unordered_map<PaperId, std::size_t> by_id_;
  std::vector<std::vector<std::size_t>> cited_by_;
  std::vector<std::vector<std::size_t>> resolved_refs_;
  std::unordered_map<AuthorId, std::vector<std::size_t>> by_author_;
  std::vector<AuthorId> author_ids_;
  std::optional<int> min_year_;
  std::optional<int> max_year_;
};

/// Parses the JSON-lines corpus format. Errors name the offending line or id.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view text);
std::string to_jsonl(const PaperRecord& paper);

/// The corpus restricted to papers with year < cutoff. Holds a reference to
/// the corpus, which must outlive it.
class CorpusSnapshot {
 public:
  CorpusSnapshot(const Corpus& corpus, int cutoff_year);

  const Corpus& corpus() const { return *corpus_; }
  int cutoff_year() const { return cutoff_; }
  bool includes(std::size_t paper_index) const { return included_[paper_index]; }
  /// Included paper indices in corpus order.
  const std::vector<std::size_t>& papers() const { return papers_; }
  /// Number of included papers citing an included paper (0 for excluded papers).
  std::size_t paper_citations(std::size_t paper_index) const { return citations_[paper_index]; }
  /// Included papers of the author.
  std::vector<std::size_t> papers_of(AuthorId author) const;
  std::size_t paper_count(AuthorId author) const;
  std::size_t citation_count(AuthorId author) const;

 private:
  const Corpus* corpus_;
  int cutoff_;
  std::vector<bool> included_;
  std::vector<std::size_t> papers_;
  std::vector<std::size_t> citations_;
};

inline CorpusSnapshot snapshot(const Corpus& corpus, int cutoff_year) { return {corpus, cutoff_year}; }

inline std::size_t citation_count(const CorpusSnapshot& snap, AuthorId author) {
  return snap.citation_count(author);
}

struct CohortSpec {
  int t = 2008;
  int t_1st = 2006;
  int delta_t = 4;
};

/// Authors whose earliest first-author paper appeared in year t_1st, ascending.
std::vector<AuthorId> identify_cohort(const Corpus& corpus, int t_1st);

struct IncrementLabel {
  AuthorId author = 0;
  std::size_t s = 0;
};

/// Citations gained from the snapshot before t through the end of year t + delta_t.
IncrementLabel citation_increment(const Corpus& corpus, AuthorId author, int t, int delta_t);

/// Batched form: labels for many authors with two snapshots.
std::vector<IncrementLabel> citation_increments(const Corpus& corpus, std::span<const AuthorId> authors,
                                                int t, int delta_t);

} // namespace ars
