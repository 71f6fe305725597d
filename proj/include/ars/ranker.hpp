#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ars/features.hpp"

namespace ars {

/// Ordered pairs (i, j) of feature-matrix rows with s_i > s_j.
struct PairSet {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t total = 0;   // pairs before any subsampling
  bool subsampled = false;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// Pairs among `rows` ordered by `labels[row]`; ties produce nothing. When the
/// count exceeds `cap`, a seeded uniform subsample of `cap` pairs is kept.
PairSet build_pairs(std::span<const double> labels, std::span<const std::size_t> rows,
                    std::size_t cap = 2'000'000, std::uint64_t seed = 0);

struct TrainConfig {
  double alpha = 0.01;
  double lambda_w = 0.01;
  int max_epochs = 100;
  double rel_tol = 1e-6;
  std::size_t pair_cap = 2'000'000;
  std::uint64_t seed = 7;

  bool operator==(const TrainConfig&) const = default;
};

using Weights = std::vector<double>;

struct IirlModel {
  Weights weights;                 // one per feature, F1..F18 order
  TrainConfig config;
  int epochs = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<double> trace;       // objective after each epoch
  bool no_pairs = false;           // trained on an empty pair set

  bool operator==(const IirlModel&) const = default;
};

/// Numerically stable ln(1 / (1 + e^-x)).
double log_sigmoid(double x);
double sigmoid(double x);

/// sum_k w_k f_k; throws on dimension mismatch.
double iirl_score(std::span<const double> weights, std::span<const double> row);

/// sum over pairs of ln sigma(s_i - s_j) - lambda * |w|^2.
double iirl_objective(std::span<const double> weights, const PairSet& pairs, const FeatureMatrix& features,
                      double lambda_w);

/// Ascent direction of one update: sigma(-d) (f_i - f_j) - lambda * w.
Weights sgd_direction(std::span<const double> weights, std::span<const double> fi, std::span<const double> fj,
                      double lambda_w);

/// The objective whose gradient sgd_direction is: ln sigma(d) - (lambda / 2) |w|^2.
double single_pair_objective(std::span<const double> weights, std::span<const double> fi,
                             std::span<const double> fj, double lambda_w);

/// w <- w + alpha * sgd_direction(...), in place.
void sgd_step(Weights& weights, std::span<const double> fi, std::span<const double> fj, double alpha,
              double lambda_w);

/// Seeded normal initialization with variance lambda_w.
Weights initial_weights(const TrainConfig& config, std::size_t dims = kFeatureCount);

/// SGD over shuffled pairs until max_epochs or a relative objective change below rel_tol.
IirlModel train_iirl(const PairSet& pairs, const FeatureMatrix& features, const TrainConfig& config);

std::vector<double> score_rows(std::span<const double> weights, const FeatureMatrix& features,
                               std::span<const std::size_t> rows);

/// Base-1: raw current citation count (F2 of the untransformed matrix).
double base1_score(const FeatureMatrix& raw, AuthorId author);
/// Base-2: raw average citation increment over the previous two years (F16).
double base2_score(const FeatureMatrix& raw, AuthorId author);

/// Ridge least squares fit of labels on feature rows. Throws when the system is
/// singular, which can only happen with ridge == 0.
Weights train_pointwise(const FeatureMatrix& features, std::span<const std::size_t> rows,
                        std::span<const double> labels, double ridge);

std::string to_json(const IirlModel& model);
IirlModel iirl_model_from_json(std::string_view text);

} // namespace ars
