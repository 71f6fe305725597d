#include "ars/topics.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace ars {

namespace {

// Frozen list; changing it changes every downstream artifact.
constexpr std::string_view kStopwords[] = {
    "about", "above", "after", "again", "against", "all", "also", "among", "and", "any", "are", "because",
    "been", "before", "being", "below", "between", "both", "but", "can", "cannot", "could", "did", "does",
    "doing", "down", "during", "each", "either", "few", "for", "from", "further", "had", "has", "have",
    "having", "her", "here", "hers", "herself", "him", "himself", "his", "how", "however", "into", "its",
    "itself", "just", "may", "more", "most", "much", "must", "myself", "nor", "not", "now", "off", "once",
    "only", "other", "our", "ours", "ourselves", "out", "over", "own", "paper", "same", "she", "should",
    "since", "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "thus", "too", "under", "until", "upon", "use",
    "used", "using", "very", "via", "was", "way", "well", "were", "what", "when", "where", "whether",
    "which", "while", "who", "whom", "why", "will", "with", "within", "without", "would", "yet", "you",
    "your", "yours", "yourself", "yourselves", "show", "propose", "proposed", "based", "new"};

const std::unordered_set<std::string_view>& stopword_set() {
  static const std::unordered_set<std::string_view> set(std::begin(kStopwords), std::end(kStopwords));
  return set;
}

void append_tokens(std::string_view text, std::vector<std::string>& out) {
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 3 && !is_stopword(cur)) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 128 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
}

void normalize(std::vector<double>& row) {
  double s = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& v : row) v /= s;
}

} // namespace

bool is_stopword(std::string_view word) { return stopword_set().contains(word); }

std::vector<std::string> tokenize(std::string_view title, std::string_view abstract) {
  std::vector<std::string> out;
  append_tokens(title, out);
  append_tokens(abstract, out);
  return out;
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> token_lists, int min_df) {
  std::unordered_map<std::string, int> df;
  for (const auto& tokens : token_lists) {
    std::unordered_set<std::string_view> seen(tokens.begin(), tokens.end());
    for (auto w : seen) ++df[std::string(w)];
  }
  Vocabulary vocab;
  for (const auto& [w, n] : df) {
    if (n >= min_df) vocab.words.push_back(w);
  }
  std::sort(vocab.words.begin(), vocab.words.end());
  for (std::size_t i = 0; i < vocab.words.size(); ++i) vocab.index.emplace(vocab.words[i], static_cast<int>(i));
  return vocab;
}

std::vector<Document> make_documents(const Vocabulary& vocab, std::span<const PaperId> paper_ids,
                                     std::span<const std::vector<std::string>> token_lists) {
  if (paper_ids.size() != token_lists.size()) throw std::invalid_argument("paper ids and token lists differ in length");
  std::vector<Document> docs(paper_ids.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    docs[d].paper_id = paper_ids[d];
    for (const auto& w : token_lists[d]) {
      auto it = vocab.index.find(w);
      if (it != vocab.index.end()) docs[d].tokens.push_back(it->second);
    }
  }
  return docs;
}

const std::vector<double>* TopicModel::distribution(PaperId paper) const {
  auto it = row_of_.find(paper);
  return it == row_of_.end() ? nullptr : &doc_topic[it->second];
}

void TopicModel::reindex() {
  row_of_.clear();
  for (std::size_t i = 0; i < paper_ids.size(); ++i) row_of_.emplace(paper_ids[i], i);
}

std::vector<std::string> TopicModel::top_words(int topic, std::size_t count) const {
  const auto& row = topic_word.at(static_cast<std::size_t>(topic));
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  count = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](std::size_t a, std::size_t b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(vocabulary[idx[i]]);
  return out;
}

bool TopicModel::operator==(const TopicModel& o) const {
  return topics == o.topics && alpha == o.alpha && beta == o.beta && seed == o.seed && iterations == o.iterations &&
         vocabulary == o.vocabulary && paper_ids == o.paper_ids && doc_topic == o.doc_topic &&
         topic_word == o.topic_word && empty_docs == o.empty_docs;
}

TopicModel fit_lda(std::span<const Document> docs, const Vocabulary& vocab, const LdaParams& params) {
  if (params.topics < 2) throw std::invalid_argument("topic model needs at least 2 topics");
  if (params.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  const bool any_tokens = std::any_of(docs.begin(), docs.end(), [](const Document& d) { return !d.empty(); });
  if (!any_tokens) throw std::runtime_error("empty corpus for topic model");

  const auto R = static_cast<std::size_t>(params.topics);
  const std::size_t V = vocab.size();
  const double alpha = params.resolved_alpha();
  const double beta = params.beta;
  const double vbeta = static_cast<double>(V) * beta;

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::vector<int>> z(docs.size());
  std::vector<std::vector<int>> n_dk(docs.size(), std::vector<int>(R, 0));
  std::vector<int> n_kw(R * V, 0);
  std::vector<int> n_k(R, 0);

  for (std::size_t d = 0; d < docs.size(); ++d) {
    z[d].resize(docs[d].tokens.size());
    for (std::size_t i = 0; i < z[d].size(); ++i) {
      auto k = static_cast<int>(unif(rng) * static_cast<double>(R));
      k = std::min(k, static_cast<int>(R) - 1);
      z[d][i] = k;
      ++n_dk[d][static_cast<std::size_t>(k)];
      ++n_kw[static_cast<std::size_t>(k) * V + static_cast<std::size_t>(docs[d].tokens[i])];
      ++n_k[static_cast<std::size_t>(k)];
    }
  }

  std::vector<double> cdf(R);
  for (int sweep = 0; sweep < params.iterations; ++sweep) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      auto& counts = n_dk[d];
      for (std::size_t i = 0; i < z[d].size(); ++i) {
        const auto w = static_cast<std::size_t>(docs[d].tokens[i]);
        auto k = static_cast<std::size_t>(z[d][i]);
        --counts[k];
        --n_kw[k * V + w];
        --n_k[k];
        double acc = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
          acc += (counts[r] + alpha) * (n_kw[r * V + w] + beta) / (n_k[r] + vbeta);
          cdf[r] = acc;
        }
        const double u = unif(rng) * acc;
        k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        k = std::min(k, R - 1);
        z[d][i] = static_cast<int>(k);
        ++counts[k];
        ++n_kw[k * V + w];
        ++n_k[k];
      }
    }
  }

  TopicModel model;
  model.topics = params.topics;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = params.seed;
  model.iterations = params.iterations;
  model.vocabulary = vocab.words;
  model.doc_topic.resize(docs.size());
  model.empty_docs.resize(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    model.paper_ids.push_back(docs[d].paper_id);
    model.empty_docs[d] = docs[d].empty();
    const double n_l = static_cast<double>(docs[d].tokens.size());
    auto& row = model.doc_topic[d];
    row.resize(R);
    for (std::size_t r = 0; r < R; ++r) row[r] = (n_dk[d][r] + alpha) / (n_l + static_cast<double>(R) * alpha);
    normalize(row);
  }
  model.topic_word.assign(R, std::vector<double>(V));
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t w = 0; w < V; ++w) model.topic_word[r][w] = (n_kw[r * V + w] + beta) / (n_k[r] + vbeta);
    normalize(model.topic_word[r]);
  }
  model.reindex();
  return model;
}

std::string to_json(const TopicModel& model) {
  nlohmann::ordered_json j;
  j["R"] = model.topics;
  j["alpha"] = model.alpha;
  j["beta"] = model.beta;
  j["seed"] = model.seed;
  j["iterations"] = model.iterations;
  j["vocabulary"] = model.vocabulary;
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  for (std::size_t d = 0; d < model.paper_ids.size(); ++d) rows[std::to_string(model.paper_ids[d])] = model.doc_topic[d];
  j["doc_topic"] = std::move(rows);
  std::vector<PaperId> empty;
  for (std::size_t d = 0; d < model.paper_ids.size(); ++d) {
    if (model.empty_docs[d]) empty.push_back(model.paper_ids[d]);
  }
  j["empty_docs"] = empty;
  j["topic_word"] = model.topic_word;
  return j.dump(1) + "\n";
}

TopicModel topic_model_from_json(std::string_view text) {
  const auto j = nlohmann::ordered_json::parse(text);
  TopicModel m;
  m.topics = j.at("R").get<int>();
  m.alpha = j.at("alpha").get<double>();
  m.beta = j.at("beta").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.iterations = j.at("iterations").get<int>();
  m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  for (const auto& [key, row] : j.at("doc_topic").items()) {
    m.paper_ids.push_back(std::stoll(key));
    m.doc_topic.push_back(row.get<std::vector<double>>());
  }
  std::unordered_set<PaperId> empty;
  for (const auto& e : j.at("empty_docs")) empty.insert(e.get<PaperId>());
  for (PaperId id : m.paper_ids) m.empty_docs.push_back(empty.contains(id));
  m.topic_word = j.at("topic_word").get<std::vector<std::vector<double>>>();
  m.reindex();
  return m;
}

std::string top_words_table(const TopicModel& model, std::size_t count) {
  std::string out = "topic  words\n";
  for (int r = 0; r < model.topics; ++r) {
    out += fmt::format("{:<6} ", r + 1);
    const auto words = model.top_words(r, count);
    for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
    out += "\n";
  }
  return out;
}

std::vector<int> top_m_topics(std::span<const double> mass, int m) {
  std::vector<int> idx(mass.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return mass[static_cast<std::size_t>(a)] > mass[static_cast<std::size_t>(b)];
  });
  idx.resize(std::min(idx.size(), static_cast<std::size_t>(std::max(m, 0))));
  return idx;
}

AuthorTopicProfile author_topic_profile(const TopicModel& model, AuthorId author, std::span<const PaperId> papers,
                                        int m) {
  if (papers.empty()) throw std::invalid_argument("author " + std::to_string(author) + " has no modeled papers");
  AuthorTopicProfile profile;
  profile.author = author;
  profile.mass.assign(static_cast<std::size_t>(model.topics), 0.0);
  for (PaperId p : papers) {
    const auto* row = model.distribution(p);
    if (!row) throw std::invalid_argument("paper " + std::to_string(p) + " is not in the topic model");
    for (std::size_t r = 0; r < row->size(); ++r) profile.mass[r] += (*row)[r];
  }
  profile.groups = top_m_topics(profile.mass, m);
  return profile;
}

std::vector<std::vector<AuthorId>> divide_researchers(std::span<const AuthorTopicProfile> profiles, int topics,
                                                      int m) {
  std::vector<std::vector<AuthorId>> groups(static_cast<std::size_t>(topics));
  for (const auto& p : profiles) {
    for (int r : top_m_topics(p.mass, m)) groups[static_cast<std::size_t>(r)].push_back(p.author);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

double diversity(std::span<const std::vector<double>> paper_distributions) {
  if (paper_distributions.empty()) return 0.0;
  double total = 0.0;
  for (const auto& row : paper_distributions) {
    double h = 0.0;
    for (double p : row) {
      if (p > 0.0) h -= p * std::log(p);
    }
    total += h;
  }
  return total / static_cast<double>(paper_distributions.size());
}

double authority(std::span<const std::vector<double>> paper_distributions, std::span<const double> citations,
                 int topics) {
  if (paper_distributions.size() != citations.size()) throw std::invalid_argument("one citation count per paper");
  double total = 0.0;
  for (std::size_t l = 0; l < paper_distributions.size(); ++l) {
    for (double p : paper_distributions[l]) total += p * citations[l];
  }
  return total / static_cast<double>(topics);
}

} // namespace ars
