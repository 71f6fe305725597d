#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ars/util.hpp"

namespace ars {

/// Lowercased ASCII alphanumeric runs of length >= 3 from title then
/// abstract, with stopwords removed.
std::vector<std::string> tokenize(std::string_view title, std::string_view abstract);
bool is_stopword(std::string_view word);

struct Vocabulary {
  std::vector<std::string> words;  // ascending
  std::unordered_map<std::string, int> index;

  std::size_t size() const { return words.size(); }
};

/// Words appearing in at least `min_df` distinct token lists.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> token_lists, int min_df = 2);

struct Document {
  PaperId paper_id = 0;
  std::vector<int> tokens;  // vocabulary indices; may be empty

  bool empty() const { return tokens.empty(); }
};

std::vector<Document> make_documents(const Vocabulary& vocab, std::span<const PaperId> paper_ids,
                                     std::span<const std::vector<std::string>> token_lists);

struct LdaParams {
  int topics = 10;
  double alpha = -1.0;  // <= 0 means 50 / topics
  double beta = 0.01;
  int iterations = 200;
  std::uint64_t seed = 1;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 50.0 / topics; }
};

struct TopicModel {
  int topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::vector<std::string> vocabulary;
  std::vector<PaperId> paper_ids;                // one per document row
  std::vector<std::vector<double>> doc_topic;    // p(r|l), rows sum to 1
  std::vector<std::vector<double>> topic_word;   // topics x vocabulary, rows sum to 1
  std::vector<bool> empty_docs;

  /// Row for a paper, or nullptr when the paper was not modeled.
  const std::vector<double>* distribution(PaperId paper) const;
  std::vector<std::string> top_words(int topic, std::size_t count) const;

  /// Rebuilds the paper id -> row lookup; call after editing paper_ids.
  void reindex();

  bool operator==(const TopicModel& other) const;

 private:
  std::unordered_map<PaperId, std::size_t> row_of_;
};

/// Collapsed Gibbs sampling, point estimate from the final state.
/// Throws if every document is empty.
TopicModel fit_lda(std::span<const Document> docs, const Vocabulary& vocab, const LdaParams& params);

std::string to_json(const TopicModel& model);
TopicModel topic_model_from_json(std::string_view text);
/// Aligned text table of the `count` most probable words per topic (1-based topic ids).
std::string top_words_table(const TopicModel& model, std::size_t count = 5);

struct AuthorTopicProfile {
  AuthorId author = 0;
  std::vector<double> mass;  // p(r|a), unnormalized
  std::vector<int> groups;   // top-m topic indices, best first
};

/// Indices of the m largest entries, ties broken by lower index.
std::vector<int> top_m_topics(std::span<const double> mass, int m);

/// Throws if the author has no papers or a paper has no row in the model.
AuthorTopicProfile author_topic_profile(const TopicModel& model, AuthorId author,
                                        std::span<const PaperId> papers, int m = 3);

/// groups[r] lists (ascending) the authors with topic r among their top m.
std::vector<std::vector<AuthorId>> divide_researchers(std::span<const AuthorTopicProfile> profiles, int topics,
                                                      int m = 3);

/// Mean Shannon entropy (natural log) of the paper distributions, 0 ln 0 = 0.
double diversity(std::span<const std::vector<double>> paper_distributions);

/// sum_r sum_l p(r|l) c_l / R
double authority(std::span<const std::vector<double>> paper_distributions, std::span<const double> citations,
                 int topics);

} // namespace ars
