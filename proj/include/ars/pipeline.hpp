#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ars/corpus.hpp"
#include "ars/eval.hpp"
#include "ars/graphs.hpp"
#include "ars/synth.hpp"
#include "ars/topics.hpp"

namespace ars {

struct PipelineConfig {
  struct Paths {
    std::string corpus = "corpus.jsonl";  // relative paths resolve against the workdir
    std::string workdir = "work";
  } paths;
  CohortSpec cohort;
  struct Topics {
    int R = 10;
    int m = 3;
    double alpha_lda = -1.0;  // <= 0: 50 / R
    double beta_lda = 0.01;
    int iterations = 200;
    std::uint64_t seed = 1;
  } topics;
  struct Train {
    double alpha = 0.01;
    double lambda_w = 0.01;
    int epochs = 100;
    double rel_tol = 1e-6;
    std::size_t pair_cap = 2'000'000;
    std::uint64_t seed = 7;
    double ridge = 1.0;
  } train;
  struct Eval {
    std::vector<double> k = {10.0, 20.0};
    double split_ratio = 0.5;
    std::uint64_t seed = 11;
    int r_hat = 1;
    std::size_t min_group = 100;
  } eval;
  std::optional<SynthConfig> synth;

  std::filesystem::path corpus_path() const;
  TrainSettings train_settings() const;
  SplitSpec split_spec() const { return {eval.split_ratio, eval.seed}; }
  LdaParams lda_params() const;
};

/// Parses the JSON config text. Unknown keys and type mismatches throw with
/// the key name; omitted keys keep their defaults.
PipelineConfig parse_config_text(std::string_view text);
PipelineConfig parse_config(const std::filesystem::path& path);

/// Applies ARS_<SECTION>_<KEY> environment overrides (e.g. ARS_COHORT_DELTA_T=4).
void apply_env_overrides(PipelineConfig& config, char** envp);
/// Same, from explicit NAME=VALUE strings.
void apply_overrides(PipelineConfig& config, const std::vector<std::string>& assignments);
/// Replaces every stage seed.
void override_seeds(PipelineConfig& config, std::uint64_t seed);

/// Fully resolved config as JSON.
std::string config_to_json(const PipelineConfig& config);
/// Hash of everything that influences artifacts (the workdir is excluded).
std::string config_hash(const PipelineConfig& config);

inline constexpr std::string_view kStageOrder[] = {"graphs", "topics", "features", "train",
                                                    "evaluate", "ablate", "transfer", "correlate"};

/// Parses "graphs,topics" or "all"; throws on unknown stage names.
std::vector<std::string> parse_stages(std::string_view list);

/// Runs the stages in dependency order. Throws with "run stage: <name>" when a
/// prerequisite artifact is missing.
void run_pipeline(const PipelineConfig& config, const std::vector<std::string>& stages);

/// Consolidated summary of the evaluation artifacts; also written to
/// reports/summary.txt. Throws when there is nothing to report.
std::string report(const std::filesystem::path& workdir);

/// Cohort-level artifacts computed in memory, shared by the file-based stages
/// and by tests that need the whole chain without touching disk.
struct CohortAnalysis {
  std::vector<AuthorId> cohort;
  TopicModel topic_model;
  std::vector<AuthorTopicProfile> profiles;
  std::vector<std::vector<AuthorId>> groups;
  FeatureMatrix raw;
  std::vector<IncrementLabel> labels;
};

struct GraphBundle {
  WeightedDigraph acn;
  WeightedDigraph accn;
  WeightedDigraph vccn;
  PageRankScores pr_acn;
  PageRankScores pr_accn;
  PageRankScores pr_vccn;
};

GraphBundle build_graphs(const CorpusSnapshot& snap);
/// LDA over the cohort's snapshot papers, profiles and topic groups.
void fit_topics(const Corpus& corpus, const PipelineConfig& config, CohortAnalysis& out);
CohortAnalysis analyze_cohort(const Corpus& corpus, const PipelineConfig& config);

} // namespace ars
