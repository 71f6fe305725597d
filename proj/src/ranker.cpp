#include "ars/ranker.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ars {

namespace {

std::span<const double> as_span(const FeatureRow& row) { return {row.data(), row.size()}; }

} // namespace

PairSet build_pairs(std::span<const double> labels, std::span<const std::size_t> rows, std::size_t cap,
                    std::uint64_t seed) {
  PairSet set;
  if (rows.size() < 2) return set;

  // Count strictly ordered pairs through a sorted copy of the labels.
  std::vector<double> sorted;
  sorted.reserve(rows.size());
  for (std::size_t r : rows) sorted.push_back(labels[r]);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t r : rows) {
    set.total += static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), labels[r]) - sorted.begin());
  }

  if (set.total <= cap) {
    set.pairs.reserve(set.total);
    for (std::size_t i : rows) {
      for (std::size_t j : rows) {
        if (labels[i] > labels[j]) set.pairs.emplace_back(i, j);
      }
    }
    return set;
  }

  // Reservoir sampling keeps the subsample uniform without materializing every pair.
  set.subsampled = true;
  set.pairs.reserve(cap);
  std::mt19937_64 rng(seed);
  std::size_t seen = 0;
  for (std::size_t i : rows) {
    for (std::size_t j : rows) {
      if (!(labels[i] > labels[j])) continue;
      if (set.pairs.size() < cap) {
        set.pairs.emplace_back(i, j);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, seen);
        const std::size_t slot = pick(rng);
        if (slot < cap) set.pairs[slot] = {i, j};
      }
      ++seen;
    }
  }
  std::sort(set.pairs.begin(), set.pairs.end());
  return set;
}

double log_sigmoid(double x) {
  // ln sigma(x) = -ln(1 + e^-x), split by sign so exp never overflows.
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double iirl_score(std::span<const double> weights, std::span<const double> row) {
  if (weights.size() != row.size()) {
    throw std::invalid_argument("score dimension mismatch: " + std::to_string(weights.size()) + " weights, " +
                                std::to_string(row.size()) + " features");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) s += weights[k] * row[k];
  return s;
}

double iirl_objective(std::span<const double> weights, const PairSet& pairs, const FeatureMatrix& features,
                      double lambda_w) {
  std::vector<double> scores(features.size());
  std::vector<bool> done(features.size(), false);
  auto score_of = [&](std::size_t r) {
    if (!done[r]) {
      scores[r] = iirl_score(weights, as_span(features.rows[r]));
      done[r] = true;
    }
    return scores[r];
  };
  double j = 0.0;
  for (const auto& [a, b] : pairs.pairs) j += log_sigmoid(score_of(a) - score_of(b));
  double norm = 0.0;
  for (double w : weights) norm += w * w;
  return j - lambda_w * norm;
}

Weights sgd_direction(std::span<const double> weights, std::span<const double> fi, std::span<const double> fj,
                      double lambda_w) {
  const double d = iirl_score(weights, fi) - iirl_score(weights, fj);
  // e^-d / (1 + e^-d) == sigma(-d)
  const double g = sigmoid(-d);
  Weights dir(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) dir[k] = g * (fi[k] - fj[k]) - lambda_w * weights[k];
  return dir;
}

double single_pair_objective(std::span<const double> weights, std::span<const double> fi,
                             std::span<const double> fj, double lambda_w) {
  double norm = 0.0;
  for (double w : weights) norm += w * w;
  return log_sigmoid(iirl_score(weights, fi) - iirl_score(weights, fj)) - 0.5 * lambda_w * norm;
}

void sgd_step(Weights& weights, std::span<const double> fi, std::span<const double> fj, double alpha,
              double lambda_w) {
  const auto dir = sgd_direction(weights, fi, fj, lambda_w);
  for (std::size_t k = 0; k < weights.size(); ++k) weights[k] += alpha * dir[k];
}

Weights initial_weights(const TrainConfig& config, std::size_t dims) {
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(config.lambda_w));
  Weights w(dims);
  for (double& v : w) v = normal(rng);
  return w;
}

IirlModel train_iirl(const PairSet& pairs, const FeatureMatrix& features, const TrainConfig& config) {
  if (!(config.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (config.lambda_w < 0.0) throw std::invalid_argument("lambda_w must be non-negative");
  if (config.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (features.size() == 0) throw std::invalid_argument("cannot train on an empty feature matrix");

  IirlModel model;
  model.config = config;
  model.weights = initial_weights(config);
  model.initial_objective = iirl_objective(model.weights, pairs, features, config.lambda_w);
  model.final_objective = model.initial_objective;
  if (pairs.empty()) {
    model.no_pairs = true;
    return model;
  }

  std::mt19937_64 rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  double previous = model.initial_objective;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t p : order) {
      const auto& [i, j] = pairs.pairs[p];
      sgd_step(model.weights, as_span(features.rows[i]), as_span(features.rows[j]), config.alpha, config.lambda_w);
    }
    const double objective = iirl_objective(model.weights, pairs, features, config.lambda_w);
    model.trace.push_back(objective);
    model.epochs = epoch + 1;
    model.final_objective = objective;
    if (std::abs(objective - previous) / (std::abs(previous) + 1e-12) < config.rel_tol) break;
    previous = objective;
  }
  return model;
}

std::vector<double> score_rows(std::span<const double> weights, const FeatureMatrix& features,
                               std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(iirl_score(weights, as_span(features.rows.at(r))));
  return out;
}

double base1_score(const FeatureMatrix& raw, AuthorId author) {
  if (raw.transformed) throw std::invalid_argument("Base-1 reads untransformed features");
  return raw.rows[raw.row_of(author)][1];
}

double base2_score(const FeatureMatrix& raw, AuthorId author) {
  if (raw.transformed) throw std::invalid_argument("Base-2 reads untransformed features");
  return raw.rows[raw.row_of(author)][15];
}

Weights train_pointwise(const FeatureMatrix& features, std::span<const std::size_t> rows,
                        std::span<const double> labels, double ridge) {
  if (ridge < 0.0) throw std::invalid_argument("ridge must be non-negative");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(kFeatureCount);
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < k; ++c) x(i, c) = features.rows.at(r)[static_cast<std::size_t>(c)];
    y(i) = labels[r];
  }
  const Eigen::MatrixXd gram = x.transpose() * x + ridge * Eigen::MatrixXd::Identity(k, k);
  const Eigen::VectorXd rhs = x.transpose() * y;
  Eigen::VectorXd w;
  if (ridge == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() < k) throw std::runtime_error("singular least-squares system; use ridge > 0");
    w = lu.solve(rhs);
  } else {
    w = gram.ldlt().solve(rhs);
  }
  return Weights(w.data(), w.data() + w.size());
}

std::string to_json(const IirlModel& m) {
  nlohmann::ordered_json j;
  j["weights"] = m.weights;
  j["feature_order"] = [&] {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < m.weights.size(); ++k) names.push_back(feature_name(k));
    return names;
  }();
  j["config"] = {{"alpha", m.config.alpha},         {"lambda_w", m.config.lambda_w},
                 {"max_epochs", m.config.max_epochs}, {"rel_tol", m.config.rel_tol},
                 {"pair_cap", m.config.pair_cap},     {"seed", m.config.seed}};
  j["epochs"] = m.epochs;
  j["initial_objective"] = m.initial_objective;
  j["final_objective"] = m.final_objective;
  j["no_pairs"] = m.no_pairs;
  j["trace"] = m.trace;
  return j.dump(1) + "\n";
}

IirlModel iirl_model_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  IirlModel m;
  m.weights = j.at("weights").get<Weights>();
  const auto& c = j.at("config");
  m.config.alpha = c.at("alpha").get<double>();
  m.config.lambda_w = c.at("lambda_w").get<double>();
  m.config.max_epochs = c.at("max_epochs").get<int>();
  m.config.rel_tol = c.at("rel_tol").get<double>();
  m.config.pair_cap = c.at("pair_cap").get<std::size_t>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.epochs = j.at("epochs").get<int>();
  m.initial_objective = j.at("initial_objective").get<double>();
  m.final_objective = j.at("final_objective").get<double>();
  m.no_pairs = j.at("no_pairs").get<bool>();
  m.trace = j.at("trace").get<std::vector<double>>();
  return m;
}

} // namespace ars
