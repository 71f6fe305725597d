#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ars/corpus.hpp"

namespace ars {

/// Knobs of the synthetic corpus generator. Each author has a latent fitness
/// (lognormal(0, fitness_sigma)) and a latent topic; `signal` couples fitness to both
/// publication rate and citation attractiveness.
struct SynthConfig {
  int n_authors = 2000;
  int n_venues = 40;
  int start_year = 2000;
  int end_year = 2012;
  int cohort_year = 2006;       // first first-author year of the young authors
  double young_fraction = 0.5;
  double paper_rate = 0.6;      // first-author papers per author-year at fitness 1
  int refs_per_paper = 8;
  double pa_exponent = 1.0;     // preferential attachment on (indegree + 1)
  int topics = 10;
  int vocab_per_topic = 150;
  double signal = 0.8;
  double fitness_sigma = 1.0;
  double coauthors_mean = 1.2;
  double same_topic_coauthor = 0.7;
  double same_topic_citation = 0.6;
  double venueless_fraction = 0.05;
  std::uint64_t seed = 1;
};

struct TruthRow {
  AuthorId author = 0;
  double fitness = 0.0;
  int topic = 0;  // 1-based latent topic

  bool operator==(const TruthRow&) const = default;
};

struct SynthResult {
  std::vector<PaperRecord> papers;
  std::vector<TruthRow> truth;
};

/// Throws std::invalid_argument on invalid or infeasible configurations.
SynthResult generate_corpus(const SynthConfig& config);

/// JSON-lines text for the papers, one object per line.
std::string corpus_jsonl(const std::vector<PaperRecord>& papers);
std::string truth_csv(const std::vector<TruthRow>& truth);

/// Writes the corpus file, `truth.csv` next to it and a provenance sidecar
/// `<corpus>.synth.json`.
void write_synthetic(const SynthConfig& config, const std::filesystem::path& corpus_path);

/// Latent fitness table for a corpus written by write_synthetic. Throws when
/// the provenance sidecar is missing or does not match the corpus or config.
std::vector<TruthRow> planted_truth(const SynthConfig& config, const std::filesystem::path& corpus_path);

std::string config_fingerprint(const SynthConfig& config);

} // namespace ars
