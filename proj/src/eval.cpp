#include "ars/eval.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ars {

namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

std::vector<AuthorId> ids_of(const EvalData& data, std::span<const std::size_t> rows) {
  std::vector<AuthorId> ids;
  ids.reserve(rows.size());
  for (std::size_t r : rows) ids.push_back(data.raw.authors[r]);
  return ids;
}

const TrainedTopic* find_trained(std::span<const TrainedTopic> trained, int topic) {
  for (const auto& t : trained) {
    if (t.topic == topic) return &t;
  }
  return nullptr;
}

} // namespace

std::pair<std::vector<AuthorId>, std::vector<AuthorId>> split(std::span<const AuthorId> group, const SplitSpec& spec) {
  if (group.size() < 2) throw std::invalid_argument("cannot split a group of fewer than 2 authors");
  if (!(spec.ratio > 0.0 && spec.ratio < 1.0)) throw std::invalid_argument("split ratio must be in (0,1)");
  std::vector<AuthorId> ids(group.begin(), group.end());
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(spec.seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t n_train = std::min(round_half_up(spec.ratio * static_cast<double>(ids.size())), ids.size());
  std::vector<AuthorId> train(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<AuthorId> test(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::size_t top_k_size(std::size_t n, double k_percent) {
  return std::max<std::size_t>(1, round_half_up(k_percent * static_cast<double>(n) / 100.0));
}

std::vector<AuthorId> top_k_set(std::span<const AuthorId> ids, std::span<const double> scores, double k_percent) {
  if (ids.empty()) throw std::invalid_argument("top-k of an empty score set");
  if (ids.size() != scores.size()) throw std::invalid_argument("one score per id");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  const std::size_t m = std::min(top_k_size(ids.size(), k_percent), ids.size());
  std::vector<AuthorId> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(ids[order[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

double precision_at_k(std::span<const AuthorId> predicted, std::span<const AuthorId> truth) {
  if (truth.empty()) throw std::invalid_argument("precision_at_k needs a non-empty true set");
  std::vector<AuthorId> a(predicted.begin(), predicted.end());
  std::vector<AuthorId> b(truth.begin(), truth.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<AuthorId> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return static_cast<double>(both.size()) / static_cast<double>(b.size());
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::iirl: return "IIRL";
    case Method::base1: return "Base-1";
    case Method::base2: return "Base-2";
    case Method::pointwise: return "Pointwise";
    case Method::oracle: return "Oracle";
    case Method::constant: return "Constant";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::iirl, Method::base1, Method::base2, Method::pointwise, Method::oracle, Method::constant}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

EvalData make_eval_data(FeatureMatrix raw, std::span<const IncrementLabel> labels) {
  if (raw.transformed) throw std::invalid_argument("make_eval_data expects the untransformed matrix");
  EvalData data;
  data.labels.assign(raw.size(), 0.0);
  std::vector<bool> seen(raw.size(), false);
  for (const auto& l : labels) {
    const auto r = raw.row_of(l.author);
    data.labels[r] = static_cast<double>(l.s);
    seen[r] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw std::invalid_argument("every feature row needs a label");
  data.transformed = log_transform(raw);
  data.raw = std::move(raw);
  return data;
}

std::vector<TopicSplit> make_splits(std::span<const std::vector<AuthorId>> groups, const FeatureMatrix& matrix,
                                    const SplitSpec& spec) {
  std::vector<TopicSplit> out;
  for (std::size_t r = 0; r < groups.size(); ++r) {
    if (groups[r].size() < 2) continue;
    const int topic = static_cast<int>(r) + 1;
    auto [train, test] = split(groups[r], {spec.ratio, derive_seed(spec.seed, static_cast<std::uint64_t>(topic))});
    TopicSplit s;
    s.topic = topic;
    for (AuthorId a : train) s.train_rows.push_back(matrix.row_of(a));
    for (AuthorId a : test) s.test_rows.push_back(matrix.row_of(a));
    out.push_back(std::move(s));
  }
  return out;
}

FeatureMatrix mask_columns(const FeatureMatrix& m, const ColumnMask& zeroed) {
  if (zeroed.empty()) return m;
  FeatureMatrix out = m;
  for (auto& row : out.rows) {
    for (std::size_t k : zeroed) row.at(k) = 0.0;
  }
  return out;
}

TrainedTopic train_topic(const TopicSplit& split, const EvalData& data, const TrainSettings& settings,
                         const ColumnMask& mask) {
  const FeatureMatrix features = mask_columns(data.transformed, mask);
  TrainConfig cfg = settings.iirl;
  cfg.seed = derive_seed(settings.iirl.seed, static_cast<std::uint64_t>(split.topic));
  const auto pairs = build_pairs(data.labels, split.train_rows, cfg.pair_cap, derive_seed(cfg.seed, 2));
  TrainedTopic t;
  t.topic = split.topic;
  t.iirl = train_iirl(pairs, features, cfg);
  t.pointwise = train_pointwise(features, split.train_rows, data.labels, settings.ridge);
  return t;
}

std::vector<double> method_scores(Method method, const EvalData& data, std::span<const std::size_t> rows,
                                  const TrainedTopic* models, const ColumnMask& mask) {
  std::vector<double> scores;
  scores.reserve(rows.size());
  switch (method) {
    case Method::iirl:
    case Method::pointwise: {
      if (!models) throw std::invalid_argument(std::string(method_name(method)) + " needs a trained model");
      const FeatureMatrix features = mask_columns(data.transformed, mask);
      const auto& w = method == Method::iirl ? models->iirl.weights : models->pointwise;
      return score_rows(w, features, rows);
    }
    case Method::base1:
      for (std::size_t r : rows) scores.push_back(base1_score(data.raw, data.raw.authors[r]));
      break;
    case Method::base2:
      for (std::size_t r : rows) scores.push_back(base2_score(data.raw, data.raw.authors[r]));
      break;
    case Method::oracle:
      for (std::size_t r : rows) scores.push_back(data.labels[r]);
      break;
    case Method::constant:
      scores.assign(rows.size(), 0.0);
      break;
  }
  return scores;
}

EvalReport score_report(int topic, std::string_view method, const EvalData& data, std::span<const std::size_t> rows,
                        std::span<const double> scores, std::span<const double> ks) {
  const auto ids = ids_of(data, rows);
  std::vector<double> truth_scores;
  for (std::size_t r : rows) truth_scores.push_back(data.labels[r]);
  EvalReport rep;
  rep.topic = topic;
  rep.method = std::string(method);
  rep.ks.assign(ks.begin(), ks.end());
  rep.n_test = rows.size();
  for (double k : ks) {
    const auto truth = top_k_set(ids, truth_scores, k);
    const auto predicted = top_k_set(ids, scores, k);
    rep.precision.push_back(precision_at_k(predicted, truth));
    rep.true_sizes.push_back(truth.size());
  }
  return rep;
}

EvalReport macro_average(std::span<const EvalReport> per_topic) {
  EvalReport avg;
  if (per_topic.empty()) return avg;
  avg.topic = 0;
  avg.method = per_topic.front().method;
  avg.ks = per_topic.front().ks;
  avg.seed = per_topic.front().seed;
  avg.precision.assign(avg.ks.size(), 0.0);
  avg.true_sizes.assign(avg.ks.size(), 0);
  for (const auto& r : per_topic) {
    avg.n_test += r.n_test;
    avg.seconds += r.seconds;
    for (std::size_t i = 0; i < avg.ks.size(); ++i) {
      avg.precision[i] += r.precision[i];
      avg.true_sizes[i] += r.true_sizes[i];
    }
  }
  for (double& p : avg.precision) p /= static_cast<double>(per_topic.size());
  return avg;
}

std::vector<EvalReport> evaluate_method(Method method, std::span<const TopicSplit> splits, const EvalData& data,
                                        std::span<const double> ks, const TrainSettings& settings,
                                        std::span<const TrainedTopic> trained, std::uint64_t seed) {
  std::vector<EvalReport> out;
  const bool needs_model = method == Method::iirl || method == Method::pointwise;
  for (const auto& s : splits) {
    const auto start = std::chrono::steady_clock::now();
    std::optional<TrainedTopic> fitted;
    const TrainedTopic* models = find_trained(trained, s.topic);
    if (needs_model && !models) {
      fitted = train_topic(s, data, settings);
      models = &*fitted;
    }
    const auto scores = method_scores(method, data, s.test_rows, models);
    auto rep = score_report(s.topic, method_name(method), data, s.test_rows, scores, ks);
    rep.seed = seed;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(rep));
  }
  if (!out.empty()) out.push_back(macro_average(out));
  return out;
}

std::vector<TransferRow> transfer_experiment(std::span<const TopicSplit> splits, const EvalData& data, int r_hat,
                                             std::span<const double> ks, const TrainSettings& settings) {
  auto source = std::find_if(splits.begin(), splits.end(), [&](const TopicSplit& s) { return s.topic == r_hat; });
  if (source == splits.end()) throw std::invalid_argument("transfer source topic " + std::to_string(r_hat) + " has no split");
  const auto source_model = train_topic(*source, data, settings);
  std::vector<TransferRow> rows;
  for (const auto& s : splits) {
    const auto own_model = s.topic == r_hat ? source_model : train_topic(s, data, settings);
    const auto own = score_report(s.topic, "own", data, s.test_rows,
                                  method_scores(Method::iirl, data, s.test_rows, &own_model), ks);
    const auto other = score_report(s.topic, "transfer", data, s.test_rows,
                                    method_scores(Method::iirl, data, s.test_rows, &source_model), ks);
    rows.push_back({s.topic, own.precision, other.precision});
  }
  return rows;
}

std::vector<AblationColumn> ablation(std::span<const std::string> groups, AblationMode mode,
                                     std::span<const TopicSplit> splits, const EvalData& data,
                                     const TrainSettings& settings, double k) {
  std::vector<FeatureGroup> parsed;
  for (const auto& g : groups) parsed.push_back(parse_feature_group(g));
  const double ks[] = {k};
  std::vector<AblationColumn> out;
  for (auto g : parsed) {
    const auto cols = group_columns(g);
    ColumnMask mask;
    if (mode == AblationMode::drop) {
      mask = cols;
    } else {
      for (std::size_t c = 0; c < kFeatureCount; ++c) {
        if (std::find(cols.begin(), cols.end(), c) == cols.end()) mask.push_back(c);
      }
    }
    AblationColumn col;
    col.label = (mode == AblationMode::keep ? "+" : "-") + std::string(group_name(g));
    for (const auto& s : splits) {
      const auto model = train_topic(s, data, settings, mask);
      const auto scores = method_scores(Method::iirl, data, s.test_rows, &model, mask);
      col.precision.push_back(score_report(s.topic, "IIRL", data, s.test_rows, scores, ks).precision.front());
    }
    out.push_back(std::move(col));
  }
  return out;
}

std::string ablation_grid_csv(std::span<const TopicSplit> splits, std::span<const AblationColumn> columns) {
  std::string out = "topic";
  for (const auto& c : columns) out += "," + c.label;
  out += "\n";
  for (std::size_t i = 0; i < splits.size(); ++i) {
    out += std::to_string(splits[i].topic);
    for (const auto& c : columns) out += fmt::format(",{:.3f}", c.precision[i]);
    out += "\n";
  }
  out += "mean";
  for (const auto& c : columns) {
    const double m = c.precision.empty() ? 0.0
                                         : std::accumulate(c.precision.begin(), c.precision.end(), 0.0) /
                                               static_cast<double>(c.precision.size());
    out += fmt::format(",{:.3f}", m);
  }
  out += "\n";
  return out;
}

double bucket_value(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const double mag = std::floor(std::log10(std::abs(v)));
  const double scale = std::pow(10.0, mag - 1.0);
  return std::round(v / scale) * scale;
}

std::vector<CorrelationRow> correlation_report(std::span<const double> values, std::span<const double> labels,
                                               std::size_t min_group) {
  if (values.size() != labels.size()) throw std::invalid_argument("one label per feature value");
  const bool integral = std::all_of(values.begin(), values.end(), [](double v) { return v == std::floor(v); });
  std::map<double, std::pair<std::size_t, double>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& g = groups[integral ? values[i] : bucket_value(values[i])];
    ++g.first;
    g.second += labels[i];
  }
  std::vector<CorrelationRow> rows;
  for (const auto& [v, g] : groups) {
    if (g.first > min_group) rows.push_back({v, g.first, g.second / static_cast<double>(g.first)});
  }
  return rows;
}

std::string correlation_csv(std::span<const CorrelationRow> rows) {
  std::string out = "value,count,mean_increment\n";
  for (const auto& r : rows) out += fmt::format("{},{},{}\n", format_g6(r.value), r.count, format_g6(r.mean_increment));
  return out;
}

std::string reports_to_json(std::span<const EvalReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["topic"] = r.topic;
    j["method"] = r.method;
    j["k"] = r.ks;
    j["precision"] = r.precision;
    j["n_test"] = r.n_test;
    j["true_sizes"] = r.true_sizes;
    j["seed"] = r.seed;
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::vector<EvalReport> reports_from_json(std::string_view text) {
  std::vector<EvalReport> out;
  for (const auto& j : nlohmann::json::parse(text)) {
    EvalReport r;
    r.topic = j.at("topic").get<int>();
    r.method = j.at("method").get<std::string>();
    r.ks = j.at("k").get<std::vector<double>>();
    r.precision = j.at("precision").get<std::vector<double>>();
    r.n_test = j.at("n_test").get<std::size_t>();
    r.true_sizes = j.at("true_sizes").get<std::vector<std::size_t>>();
    r.seed = j.at("seed").get<std::uint64_t>();
    out.push_back(std::move(r));
  }
  return out;
}

std::string reports_to_table(std::span<const EvalReport> reports) {
  if (reports.empty()) return {};
  std::string out = fmt::format("{:<8}{:<12}{:>8}", "topic", "method", "n_test");
  for (double k : reports.front().ks) out += fmt::format("{:>10}", fmt::format("Pre@{}%", k));
  out += "\n";
  for (const auto& r : reports) {
    out += fmt::format("{:<8}{:<12}{:>8}", r.topic == 0 ? std::string("avg") : std::to_string(r.topic), r.method,
                       r.n_test);
    for (double p : r.precision) out += fmt::format("{:>10.4f}", p);
    out += "\n";
  }
  return out;
}

std::string transfer_to_json(std::span<const TransferRow> rows, int r_hat, std::span<const double> ks) {
  nlohmann::ordered_json j;
  j["r_hat"] = r_hat;
  j["k"] = std::vector<double>(ks.begin(), ks.end());
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) arr.push_back({{"topic", r.topic}, {"own", r.own}, {"transfer", r.transfer}});
  j["rows"] = std::move(arr);
  return j.dump(1) + "\n";
}

} // namespace ars
