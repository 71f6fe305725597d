#include "ars/synth.hpp"

#include "ars/topics.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace ars {

namespace {

constexpr PaperId kFirstPaperId = 100001;
constexpr VenueId kFirstVenueId = 1;

// Prefix sums over non-negative weights with O(log n) update and sampling.
class Fenwick {
 public:
  void push(double w) {
    const std::size_t i = tree_.size() + 1;
    double v = w;
    // The new node covers (i - lowbit(i), i]; pull in the existing children.
    for (std::size_t step = 1; step < (i & (~i + 1)); step <<= 1) v += tree_[i - step - 1];
    tree_.push_back(v);
    raw_.push_back(w);
  }
  void set(std::size_t index, double w) {
    const double delta = w - raw_[index];
    raw_[index] = w;
    for (std::size_t i = index + 1; i <= tree_.size(); i += i & (~i + 1)) tree_[i - 1] += delta;
  }
  double prefix(std::size_t count) const {
    double s = 0.0;
    for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i - 1];
    return s;
  }
  /// Smallest index whose inclusive prefix sum exceeds target.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t mask = 1;
    while (mask * 2 <= tree_.size()) mask *= 2;
    for (; mask > 0; mask >>= 1) {
      if (pos + mask <= tree_.size() && tree_[pos + mask - 1] <= target) {
        pos += mask;
        target -= tree_[pos - 1];
      }
    }
    return pos;
  }
  std::size_t size() const { return raw_.size(); }

 private:
  std::vector<double> tree_;
  std::vector<double> raw_;
};

void validate(const SynthConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid synth config: ") + what);
  };
  require(c.n_authors >= 1, "n_authors must be >= 1");
  require(c.n_venues >= 1, "n_venues must be >= 1");
  require(c.topics >= 1, "topics must be >= 1");
  require(c.vocab_per_topic >= 1, "vocab_per_topic must be >= 1");
  require(c.refs_per_paper >= 1, "refs_per_paper must be >= 1");
  require(c.start_year <= c.cohort_year && c.cohort_year <= c.end_year, "cohort_year must lie in the year range");
  require(c.signal >= 0.0 && c.signal <= 1.0, "signal must be in [0,1]");
  require(c.young_fraction >= 0.0 && c.young_fraction <= 1.0, "young_fraction must be in [0,1]");
  require(c.paper_rate > 0.0, "paper_rate must be positive");
  require(c.coauthors_mean >= 0.0, "coauthors_mean must be non-negative");
  require(c.pa_exponent >= 0.0, "pa_exponent must be non-negative");
  require(c.fitness_sigma > 0.0, "fitness_sigma must be positive");
}

struct Latent {
  double fitness;
  int topic;  // 0-based
  int start_year;
};

std::vector<Latent> draw_latents(const SynthConfig& c) {
  std::mt19937_64 rng(derive_seed(c.seed, 1));
  std::lognormal_distribution<double> fitness(0.0, c.fitness_sigma);
  std::uniform_int_distribution<int> topic(0, c.topics - 1);
  std::bernoulli_distribution young(c.young_fraction);
  std::uniform_int_distribution<int> senior_start(c.start_year, std::max(c.start_year, c.cohort_year - 1));
  std::vector<Latent> out(static_cast<std::size_t>(c.n_authors));
  for (auto& l : out) {
    l.fitness = fitness(rng);
    l.topic = topic(rng);
    const bool is_young = young(rng) || c.cohort_year == c.start_year;
    l.start_year = is_young ? c.cohort_year : senior_start(rng);
  }
  return out;
}

std::vector<std::string> make_words(const SynthConfig& c) {
  static constexpr const char* kSyllables[] = {"ka", "lo", "mi", "nu", "pe", "ra", "si", "tu",
                                               "vo", "ze", "bi", "fa", "go", "hu", "ji", "xe"};
  const std::size_t needed = static_cast<std::size_t>(c.topics + 1) * static_cast<std::size_t>(c.vocab_per_topic);
  std::vector<std::string> words;
  words.reserve(needed);
  for (std::size_t n = 0; words.size() < needed; ++n) {
    std::string w;
    std::size_t x = n;
    do {
      w += kSyllables[x % 16];
      x /= 16;
    } while (x > 0);
    if (w.size() < 6) w += "ne";
    if (w.size() < 6) w += "ta";
    if (!is_stopword(w)) words.push_back(std::move(w));
  }
  return words;
}

} // namespace

std::string config_fingerprint(const SynthConfig& c) {
  return fmt::format("{}|{}|{}|{}|{}|{}|{:.17g}|{}|{:.17g}|{}|{}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{}|{:.17g}",
                     c.n_authors, c.n_venues, c.start_year, c.end_year, c.cohort_year, c.topics, c.young_fraction,
                     c.refs_per_paper, c.pa_exponent, c.vocab_per_topic, c.seed, c.paper_rate, c.signal,
                     c.coauthors_mean, c.same_topic_coauthor, c.same_topic_citation, c.venueless_fraction, c.fitness_sigma);
}

SynthResult generate_corpus(const SynthConfig& c) {
  validate(c);
  const auto latents = draw_latents(c);
  const auto words = make_words(c);
  const auto R = static_cast<std::size_t>(c.topics);
  const auto W = static_cast<std::size_t>(c.vocab_per_topic);

  std::mt19937_64 rng(derive_seed(c.seed, 2));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::poisson_distribution<int> coauthor_count(c.coauthors_mean);
  std::uniform_int_distribution<VenueId> venue(kFirstVenueId, kFirstVenueId + c.n_venues - 1);

  // Zipf-like word ranks inside a block.
  std::vector<double> zipf(W);
  for (std::size_t j = 0; j < W; ++j) zipf[j] = 1.0 / static_cast<double>(j + 1);
  std::discrete_distribution<std::size_t> word_rank(zipf.begin(), zipf.end());
  auto sentence = [&](std::size_t topic, int length) {
    std::string s;
    for (int i = 0; i < length; ++i) {
      const std::size_t block = unif(rng) < 0.75 ? topic : R;
      if (i) s += ' ';
      s += words[block * W + word_rank(rng)];
    }
    return s;
  };

  SynthResult result;
  for (std::size_t a = 0; a < latents.size(); ++a) {
    result.truth.push_back({static_cast<AuthorId>(a + 1), latents[a].fitness, latents[a].topic + 1});
  }

  auto attractiveness = [&](double fitness, std::size_t indegree) {
    return std::pow(static_cast<double>(indegree) + 1.0, c.pa_exponent) * std::pow(fitness, c.signal);
  };

  std::vector<std::size_t> indegree;
  std::vector<double> paper_fitness;
  std::vector<std::size_t> paper_topic;
  Fenwick global;
  std::vector<Fenwick> by_topic(R);
  std::vector<std::vector<std::size_t>> topic_slot;  // per topic: global paper index of each slot
  topic_slot.resize(R);
  std::vector<std::size_t> slot_in_topic;

  for (int year = c.start_year; year <= c.end_year; ++year) {
    // Papers of earlier years are citable; this year's are not yet.
    const std::size_t citable = global.size();
    std::vector<std::size_t> citable_topic(R);
    for (std::size_t r = 0; r < R; ++r) citable_topic[r] = by_topic[r].size();
    if (year > c.start_year && citable < static_cast<std::size_t>(c.refs_per_paper)) {
      throw std::invalid_argument(fmt::format("infeasible synth config: {} references per paper but only {} papers before {}",
                                              c.refs_per_paper, citable, year));
    }

    // Co-authors are drawn with the same fitness weighting as productivity.
    std::vector<std::size_t> active;
    std::vector<double> active_weight;
    std::vector<std::vector<std::size_t>> active_topic(R);
    std::vector<std::vector<double>> active_topic_weight(R);
    for (std::size_t a = 0; a < latents.size(); ++a) {
      if (latents[a].start_year <= year) {
        const double w = std::pow(latents[a].fitness, c.signal);
        const auto t = static_cast<std::size_t>(latents[a].topic);
        active.push_back(a);
        active_weight.push_back(w);
        active_topic[t].push_back(a);
        active_topic_weight[t].push_back(w);
      }
    }
    std::discrete_distribution<std::size_t> pick_any(active_weight.begin(), active_weight.end());
    std::vector<std::discrete_distribution<std::size_t>> pick_in_topic;
    for (std::size_t r = 0; r < R; ++r) {
      pick_in_topic.emplace_back(active_topic_weight[r].begin(), active_topic_weight[r].end());
    }

    for (std::size_t a : active) {
      const auto& lat = latents[a];
      std::poisson_distribution<int> count(c.paper_rate * std::pow(lat.fitness, c.signal));
      int n = count(rng);
      if (year == lat.start_year) n = std::max(n, 1);
      for (int k = 0; k < n; ++k) {
        PaperRecord p;
        p.id = kFirstPaperId + static_cast<PaperId>(result.papers.size());
        p.year = year;
        const auto topic = static_cast<std::size_t>(lat.topic);
        p.authors.push_back(static_cast<AuthorId>(a + 1));
        const int extra = coauthor_count(rng);
        for (int e = 0; e < extra; ++e) {
          const std::size_t pick = unif(rng) < c.same_topic_coauthor ? active_topic[topic][pick_in_topic[topic](rng)]
                                                                      : active[pick_any(rng)];
          const auto id = static_cast<AuthorId>(pick + 1);
          if (std::find(p.authors.begin(), p.authors.end(), id) == p.authors.end()) p.authors.push_back(id);
        }
        if (unif(rng) >= c.venueless_fraction) p.venue = venue(rng);
        p.title = sentence(topic, 8);
        p.abstract = sentence(topic, 40);

        if (year > c.start_year) {
          std::unordered_set<std::size_t> chosen;
          int attempts = 0;
          while (static_cast<int>(chosen.size()) < c.refs_per_paper && attempts < 50 * c.refs_per_paper) {
            ++attempts;
            std::size_t q;
            if (citable_topic[topic] > 0 && unif(rng) < c.same_topic_citation) {
              const auto& tree = by_topic[topic];
              const double total = tree.prefix(citable_topic[topic]);
              q = topic_slot[topic][std::min(tree.find(unif(rng) * total), citable_topic[topic] - 1)];
            } else {
              const double total = global.prefix(citable);
              q = std::min(global.find(unif(rng) * total), citable - 1);
            }
            chosen.insert(q);
          }
          std::vector<std::size_t> refs(chosen.begin(), chosen.end());
          std::sort(refs.begin(), refs.end());
          for (std::size_t q : refs) {
            p.refs.push_back(kFirstPaperId + static_cast<PaperId>(q));
            ++indegree[q];
            const double w = attractiveness(paper_fitness[q], indegree[q]);
            global.set(q, w);
            by_topic[paper_topic[q]].set(slot_in_topic[q], w);
          }
        }

        const std::size_t index = result.papers.size();
        indegree.push_back(0);
        paper_fitness.push_back(lat.fitness);
        paper_topic.push_back(topic);
        const double w = attractiveness(lat.fitness, 0);
        global.push(w);
        slot_in_topic.push_back(by_topic[topic].size());
        by_topic[topic].push(w);
        topic_slot[topic].push_back(index);
        result.papers.push_back(std::move(p));
      }
    }
  }
  return result;
}

std::string corpus_jsonl(const std::vector<PaperRecord>& papers) {
  std::string out;
  for (const auto& p : papers) out += to_jsonl(p) + "\n";
  return out;
}

std::string truth_csv(const std::vector<TruthRow>& truth) {
  std::string out = "author_id,fitness,topic\n";
  for (const auto& t : truth) out += fmt::format("{},{:.17g},{}\n", t.author, t.fitness, t.topic);
  return out;
}

void write_synthetic(const SynthConfig& config, const std::filesystem::path& corpus_path) {
  const auto result = generate_corpus(config);
  const std::string text = corpus_jsonl(result.papers);
  write_file(corpus_path, text);
  auto truth_path = corpus_path.parent_path() / "truth.csv";
  write_file(truth_path, truth_csv(result.truth));
  nlohmann::ordered_json side;
  side["generator"] = "ars-synth";
  side["config"] = config_fingerprint(config);
  side["config_hash"] = hash_hex(fnv1a(config_fingerprint(config)));
  side["corpus_hash"] = hash_hex(fnv1a(text));
  write_file(corpus_path.string() + ".synth.json", side.dump(1) + "\n");
}

std::vector<TruthRow> planted_truth(const SynthConfig& config, const std::filesystem::path& corpus_path) {
  const std::filesystem::path side_path = corpus_path.string() + ".synth.json";
  if (!std::filesystem::exists(side_path)) {
    throw std::runtime_error("missing provenance hash: " + corpus_path.string() + " was not generated by synth");
  }
  const auto side = nlohmann::json::parse(read_file(side_path));
  if (!side.contains("corpus_hash") || side.at("corpus_hash") != file_hash(corpus_path)) {
    throw std::runtime_error("missing provenance hash: " + corpus_path.string() + " does not match its synth record");
  }
  if (side.value("config_hash", "") != hash_hex(fnv1a(config_fingerprint(config)))) {
    throw std::runtime_error("synth config does not match the one that generated " + corpus_path.string());
  }
  validate(config);
  const auto latents = draw_latents(config);
  std::vector<TruthRow> out;
  for (std::size_t a = 0; a < latents.size(); ++a) {
    out.push_back({static_cast<AuthorId>(a + 1), latents[a].fitness, latents[a].topic + 1});
  }
  return out;
}

} // namespace ars
