#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ars/features.hpp"
#include "ars/ranker.hpp"

namespace ars {

struct SplitSpec {
  double ratio = 0.5;
  std::uint64_t seed = 11;
};

/// Seeded uniform partition into (train, test), both ascending.
/// |train| = round-half-up(ratio * n). Throws when |group| < 2.
std::pair<std::vector<AuthorId>, std::vector<AuthorId>> split(std::span<const AuthorId> group, const SplitSpec& spec);

/// max(1, round-half-up(k% * n))
std::size_t top_k_size(std::size_t n, double k_percent);

/// The top-k% ids by score, ties broken by ascending id; returned ascending.
std::vector<AuthorId> top_k_set(std::span<const AuthorId> ids, std::span<const double> scores, double k_percent);

/// |predicted ∩ truth| / |truth|; throws on an empty truth set.
double precision_at_k(std::span<const AuthorId> predicted, std::span<const AuthorId> truth);

enum class Method { iirl, base1, base2, pointwise, oracle, constant };
std::string_view method_name(Method m);
Method parse_method(std::string_view name);

/// Cohort-level inputs shared by every evaluation.
struct EvalData {
  FeatureMatrix raw;
  FeatureMatrix transformed;
  std::vector<double> labels;  // increment s, aligned with matrix rows
};

/// Builds EvalData from raw features and per-author increments.
EvalData make_eval_data(FeatureMatrix raw, std::span<const IncrementLabel> labels);

struct TopicSplit {
  int topic = 0;  // 1-based
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// One split per topic group with at least 2 members; split seed derived from
/// (spec.seed, topic) so every method sees the same partition.
std::vector<TopicSplit> make_splits(std::span<const std::vector<AuthorId>> groups, const FeatureMatrix& matrix,
                                    const SplitSpec& spec);

/// Columns set to zero before training and scoring.
using ColumnMask = std::vector<std::size_t>;
FeatureMatrix mask_columns(const FeatureMatrix& m, const ColumnMask& zeroed);

struct TrainedTopic {
  int topic = 0;
  IirlModel iirl;
  Weights pointwise;
};

struct TrainSettings {
  TrainConfig iirl;
  double ridge = 1.0;
};

TrainedTopic train_topic(const TopicSplit& split, const EvalData& data, const TrainSettings& settings,
                         const ColumnMask& mask = {});

/// Scores of `rows` under a method. Trained methods need `models`.
std::vector<double> method_scores(Method method, const EvalData& data, std::span<const std::size_t> rows,
                                  const TrainedTopic* models, const ColumnMask& mask = {});

struct EvalReport {
  int topic = 0;  // 0 for the macro average
  std::string method;
  std::vector<double> ks;
  std::vector<double> precision;
  std::size_t n_test = 0;
  std::vector<std::size_t> true_sizes;
  std::uint64_t seed = 0;
  double seconds = 0.0;  // not serialized, reports stay byte-stable
};

/// Pre@k% of the given scores on the test rows for every k.
EvalReport score_report(int topic, std::string_view method, const EvalData& data, std::span<const std::size_t> rows,
                        std::span<const double> scores, std::span<const double> ks);

/// Per-topic reports followed by the macro average (topic 0). When
/// `trained` is empty, trained methods are fitted on each train half.
std::vector<EvalReport> evaluate_method(Method method, std::span<const TopicSplit> splits, const EvalData& data,
                                        std::span<const double> ks, const TrainSettings& settings,
                                        std::span<const TrainedTopic> trained = {}, std::uint64_t seed = 0);

EvalReport macro_average(std::span<const EvalReport> per_topic);

struct TransferRow {
  int topic = 0;
  std::vector<double> own;
  std::vector<double> transfer;
};

/// Own-topic IIRL model vs the model of topic r_hat, both on each topic's test half.
std::vector<TransferRow> transfer_experiment(std::span<const TopicSplit> splits, const EvalData& data, int r_hat,
                                             std::span<const double> ks, const TrainSettings& settings);

enum class AblationMode { keep, drop };

struct AblationColumn {
  std::string label;               // "+Temporal", "-Venue", "All"
  std::vector<double> precision;   // one per split, same order
};

/// IIRL Pre@k% per topic with each named group kept alone or removed.
/// Throws on unknown group names.
std::vector<AblationColumn> ablation(std::span<const std::string> groups, AblationMode mode,
                                     std::span<const TopicSplit> splits, const EvalData& data,
                                     const TrainSettings& settings, double k = 10.0);

/// +group columns, -group columns and All: the full grid as CSV with a mean row.
std::string ablation_grid_csv(std::span<const TopicSplit> splits, std::span<const AblationColumn> columns);

struct CorrelationRow {
  double value = 0.0;
  std::size_t count = 0;
  double mean_increment = 0.0;
};

/// Groups authors by feature value (bucketed to 2 significant digits unless the
/// column is integral) and keeps groups with count > min_group.
std::vector<CorrelationRow> correlation_report(std::span<const double> values, std::span<const double> labels,
                                               std::size_t min_group = 100);
double bucket_value(double v);
std::string correlation_csv(std::span<const CorrelationRow> rows);

std::string reports_to_json(std::span<const EvalReport> reports);
std::vector<EvalReport> reports_from_json(std::string_view text);
/// Aligned columns: topic, method, Pre@k% ...
std::string reports_to_table(std::span<const EvalReport> reports);
std::string transfer_to_json(std::span<const TransferRow> rows, int r_hat, std::span<const double> ks);

} // namespace ars
