#include "ars/pipeline.hpp"

#include "ars/features.hpp"
#include "ars/ranker.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ars {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config

namespace {

using Setter = std::function<void(PipelineConfig&, const json&, const std::string&)>;

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  throw std::runtime_error("key " + key + ": expected " + expected);
}

template <class Get>
Setter int_setter(Get get) {
  return [get](PipelineConfig& c, const json& v, const std::string& key) {
    if (!v.is_number_integer()) type_error(key, "integer");
    get(c) = v.get<std::int64_t>();
  };
}

template <class Get>
Setter uint_setter(Get get) {
  return [get](PipelineConfig& c, const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) type_error(key, "non-negative integer");
    get(c) = v.get<std::uint64_t>();
  };
}

template <class Get>
Setter number_setter(Get get) {
  return [get](PipelineConfig& c, const json& v, const std::string& key) {
    if (!v.is_number()) type_error(key, "number");
    get(c) = v.get<double>();
  };
}

template <class Get>
Setter string_setter(Get get) {
  return [get](PipelineConfig& c, const json& v, const std::string& key) {
    if (!v.is_string()) type_error(key, "string");
    get(c) = v.get<std::string>();
  };
}

template <class Get>
Setter number_list_setter(Get get) {
  return [get](PipelineConfig& c, const json& v, const std::string& key) {
    if (!v.is_array() || v.empty()) type_error(key, "non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) type_error(key, "non-empty array of numbers");
      out.push_back(e.get<double>());
    }
    get(c) = out;
  };
}

SynthConfig& synth_of(PipelineConfig& c) {
  if (!c.synth) c.synth = SynthConfig{};
  return *c.synth;
}

// Integer setters write through int64 into narrower fields.
struct IntRef {
  explicit IntRef(int& r) : ref(r) {}
  IntRef& operator=(std::int64_t v) {
    ref = static_cast<int>(v);
    return *this;
  }
  int& ref;
};

struct SizeRef {
  explicit SizeRef(std::size_t& r) : ref(r) {}
  SizeRef& operator=(std::uint64_t v) {
    ref = static_cast<std::size_t>(v);
    return *this;
  }
  std::size_t& ref;
};

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"paths",
       {{"corpus", string_setter([](PipelineConfig& c) -> std::string& { return c.paths.corpus; })},
        {"workdir", string_setter([](PipelineConfig& c) -> std::string& { return c.paths.workdir; })}}},
      {"cohort",
       {{"t", int_setter([](PipelineConfig& c) { return IntRef(c.cohort.t); })},
        {"t_1st", int_setter([](PipelineConfig& c) { return IntRef(c.cohort.t_1st); })},
        {"delta_t", int_setter([](PipelineConfig& c) { return IntRef(c.cohort.delta_t); })}}},
      {"topics",
       {{"R", int_setter([](PipelineConfig& c) { return IntRef(c.topics.R); })},
        {"m", int_setter([](PipelineConfig& c) { return IntRef(c.topics.m); })},
        {"alpha_lda", number_setter([](PipelineConfig& c) -> double& { return c.topics.alpha_lda; })},
        {"beta_lda", number_setter([](PipelineConfig& c) -> double& { return c.topics.beta_lda; })},
        {"iterations", int_setter([](PipelineConfig& c) { return IntRef(c.topics.iterations); })},
        {"seed", uint_setter([](PipelineConfig& c) -> std::uint64_t& { return c.topics.seed; })}}},
      {"train",
       {{"alpha", number_setter([](PipelineConfig& c) -> double& { return c.train.alpha; })},
        {"lambda_w", number_setter([](PipelineConfig& c) -> double& { return c.train.lambda_w; })},
        {"epochs", int_setter([](PipelineConfig& c) { return IntRef(c.train.epochs); })},
        {"rel_tol", number_setter([](PipelineConfig& c) -> double& { return c.train.rel_tol; })},
        {"pair_cap", uint_setter([](PipelineConfig& c) { return SizeRef(c.train.pair_cap); })},
        {"seed", uint_setter([](PipelineConfig& c) -> std::uint64_t& { return c.train.seed; })},
        {"ridge", number_setter([](PipelineConfig& c) -> double& { return c.train.ridge; })}}},
      {"eval",
       {{"k", number_list_setter([](PipelineConfig& c) -> std::vector<double>& { return c.eval.k; })},
        {"split_ratio", number_setter([](PipelineConfig& c) -> double& { return c.eval.split_ratio; })},
        {"seed", uint_setter([](PipelineConfig& c) -> std::uint64_t& { return c.eval.seed; })},
        {"r_hat", int_setter([](PipelineConfig& c) { return IntRef(c.eval.r_hat); })},
        {"min_group", uint_setter([](PipelineConfig& c) { return SizeRef(c.eval.min_group); })}}},
      {"synth",
       {{"n_authors", int_setter([](PipelineConfig& c) { return IntRef(synth_of(c).n_authors); })},
        {"n_venues", int_setter([](PipelineConfig& c) { return IntRef(synth_of(c).n_venues); })},
        {"start_year", int_setter([](PipelineConfig& c) { return IntRef(synth_of(c).start_year); })},
        {"end_year", int_setter([](PipelineConfig& c) { return IntRef(synth_of(c).end_year); })},
        {"cohort_year", int_setter([](PipelineConfig& c) { return IntRef(synth_of(c).cohort_year); })},
        {"young_fraction", number_setter([](PipelineConfig& c) -> double& { return synth_of(c).young_fraction; })},
        {"paper_rate", number_setter([](PipelineConfig& c) -> double& { return synth_of(c).paper_rate; })},
        {"refs_per_paper", int_setter([](PipelineConfig& c) { return IntRef(synth_of(c).refs_per_paper); })},
        {"pa_exponent", number_setter([](PipelineConfig& c) -> double& { return synth_of(c).pa_exponent; })},
        {"topics", int_setter([](PipelineConfig& c) { return IntRef(synth_of(c).topics); })},
        {"vocab_per_topic", int_setter([](PipelineConfig& c) { return IntRef(synth_of(c).vocab_per_topic); })},
        {"signal", number_setter([](PipelineConfig& c) -> double& { return synth_of(c).signal; })},
        {"fitness_sigma", number_setter([](PipelineConfig& c) -> double& { return synth_of(c).fitness_sigma; })},
        {"coauthors_mean", number_setter([](PipelineConfig& c) -> double& { return synth_of(c).coauthors_mean; })},
        {"same_topic_coauthor",
         number_setter([](PipelineConfig& c) -> double& { return synth_of(c).same_topic_coauthor; })},
        {"same_topic_citation",
         number_setter([](PipelineConfig& c) -> double& { return synth_of(c).same_topic_citation; })},
        {"venueless_fraction",
         number_setter([](PipelineConfig& c) -> double& { return synth_of(c).venueless_fraction; })},
        {"seed", uint_setter([](PipelineConfig& c) -> std::uint64_t& { return synth_of(c).seed; })}}},
  };
  return s;
}

void apply_json(PipelineConfig& config, const json& root) {
  if (!root.is_object()) throw std::runtime_error("config must be a JSON object");
  const auto& s = schema();
  for (const auto& [section, body] : root.items()) {
    auto sec = s.find(section);
    if (sec == s.end()) throw std::runtime_error("unknown key: " + section);
    if (!body.is_object()) type_error(section, "object");
    if (section == "synth") synth_of(config);
    for (const auto& [key, value] : body.items()) {
      auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw std::runtime_error("unknown key: " + section + "." + key);
      setter->second(config, value, section + "." + key);
    }
  }
}

void validate(const PipelineConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error("invalid config: " + what);
  };
  require(c.cohort.t_1st < c.cohort.t, "cohort.t_1st must be before cohort.t");
  require(c.cohort.delta_t >= 1, "cohort.delta_t must be >= 1");
  require(c.topics.R >= 2, "topics.R must be >= 2");
  require(c.topics.m >= 1 && c.topics.m <= c.topics.R, "topics.m must be in [1, R]");
  require(c.topics.iterations >= 0, "topics.iterations must be >= 0");
  require(c.train.alpha > 0.0, "train.alpha must be positive");
  require(c.train.lambda_w >= 0.0, "train.lambda_w must be non-negative");
  require(c.train.epochs >= 1, "train.epochs must be >= 1");
  require(c.train.ridge >= 0.0, "train.ridge must be non-negative");
  require(c.eval.split_ratio > 0.0 && c.eval.split_ratio < 1.0, "eval.split_ratio must be in (0,1)");
  require(c.eval.r_hat >= 1 && c.eval.r_hat <= c.topics.R, "eval.r_hat must be a topic id in [1, R]");
  for (double k : c.eval.k) require(k > 0.0 && k <= 100.0, "eval.k values must be in (0,100]");
}

} // namespace

fs::path PipelineConfig::corpus_path() const {
  fs::path p = paths.corpus;
  return p.is_absolute() ? p : fs::path(paths.workdir) / p;
}

TrainSettings PipelineConfig::train_settings() const {
  TrainSettings s;
  s.iirl.alpha = train.alpha;
  s.iirl.lambda_w = train.lambda_w;
  s.iirl.max_epochs = train.epochs;
  s.iirl.rel_tol = train.rel_tol;
  s.iirl.pair_cap = train.pair_cap;
  s.iirl.seed = train.seed;
  s.ridge = train.ridge;
  return s;
}

LdaParams PipelineConfig::lda_params() const {
  LdaParams p;
  p.topics = topics.R;
  p.alpha = topics.alpha_lda;
  p.beta = topics.beta_lda;
  p.iterations = topics.iterations;
  p.seed = topics.seed;
  return p;
}

PipelineConfig parse_config_text(std::string_view text) {
  PipelineConfig config;
  const auto trimmed = text.find_first_not_of(" \t\r\n");
  if (trimmed != std::string_view::npos) {
    json root;
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
    }
    apply_json(config, root);
  }
  validate(config);
  return config;
}

PipelineConfig parse_config(const fs::path& path) { return parse_config_text(read_file(path)); }

void apply_overrides(PipelineConfig& config, const std::vector<std::string>& assignments) {
  json patch = json::object();
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (a.rfind("ARS_", 0) != 0 || eq == std::string::npos) continue;
    std::string name = a.substr(4, eq - 4);
    const std::string value = a.substr(eq + 1);
    for (char& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    const auto us = name.find('_');
    if (us == std::string::npos) throw std::runtime_error("unknown key: " + name);
    const std::string section = name.substr(0, us);
    std::string key = name.substr(us + 1);
    if (section == "topics" && key == "r") key = "R";
    json v;
    try {
      v = json::parse(value);
    } catch (const json::parse_error&) {
      try {
        v = json::parse("[" + value + "]");
      } catch (const json::parse_error&) {
        v = value;
      }
    }
    if (section == "eval" && key == "k" && v.is_number()) v = json::array({v});
    patch[section][key] = v;
  }
  if (!patch.empty()) {
    apply_json(config, patch);
    validate(config);
  }
}

void apply_env_overrides(PipelineConfig& config, char** envp) {
  std::vector<std::string> assignments;
  for (char** e = envp; e && *e; ++e) {
    if (std::strncmp(*e, "ARS_", 4) == 0) assignments.emplace_back(*e);
  }
  std::sort(assignments.begin(), assignments.end());
  apply_overrides(config, assignments);
}

void override_seeds(PipelineConfig& config, std::uint64_t seed) {
  config.topics.seed = seed;
  config.train.seed = seed;
  config.eval.seed = seed;
  if (config.synth) config.synth->seed = seed;
}

namespace {

ojson config_json(const PipelineConfig& c, bool with_workdir) {
  ojson j;
  j["paths"]["corpus"] = c.paths.corpus;
  if (with_workdir) j["paths"]["workdir"] = c.paths.workdir;
  j["cohort"] = {{"t", c.cohort.t}, {"t_1st", c.cohort.t_1st}, {"delta_t", c.cohort.delta_t}};
  j["topics"] = {{"R", c.topics.R},
                 {"m", c.topics.m},
                 {"alpha_lda", c.topics.alpha_lda > 0.0 ? c.topics.alpha_lda : 50.0 / c.topics.R},
                 {"beta_lda", c.topics.beta_lda},
                 {"iterations", c.topics.iterations},
                 {"seed", c.topics.seed}};
  j["train"] = {{"alpha", c.train.alpha},     {"lambda_w", c.train.lambda_w}, {"epochs", c.train.epochs},
                {"rel_tol", c.train.rel_tol}, {"pair_cap", c.train.pair_cap}, {"seed", c.train.seed},
                {"ridge", c.train.ridge}};
  j["eval"] = {{"k", c.eval.k},
               {"split_ratio", c.eval.split_ratio},
               {"seed", c.eval.seed},
               {"r_hat", c.eval.r_hat},
               {"min_group", c.eval.min_group}};
  if (c.synth) {
    const auto& s = *c.synth;
    j["synth"] = {{"n_authors", s.n_authors},
                  {"n_venues", s.n_venues},
                  {"start_year", s.start_year},
                  {"end_year", s.end_year},
                  {"cohort_year", s.cohort_year},
                  {"young_fraction", s.young_fraction},
                  {"paper_rate", s.paper_rate},
                  {"refs_per_paper", s.refs_per_paper},
                  {"pa_exponent", s.pa_exponent},
                  {"topics", s.topics},
                  {"vocab_per_topic", s.vocab_per_topic},
                  {"signal", s.signal},
                  {"coauthors_mean", s.coauthors_mean},
                  {"same_topic_coauthor", s.same_topic_coauthor},
                  {"same_topic_citation", s.same_topic_citation},
                  {"venueless_fraction", s.venueless_fraction},
                  {"fitness_sigma", s.fitness_sigma},
                  {"seed", s.seed}};
  }
  return j;
}

} // namespace

std::string config_to_json(const PipelineConfig& config) { return config_json(config, true).dump(1) + "\n"; }

std::string config_hash(const PipelineConfig& config) {
  auto j = config_json(config, false);
  j.erase("synth");  // the corpus content hash covers it
  return hash_hex(fnv1a(j.dump()));
}

std::vector<std::string> parse_stages(std::string_view list) {
  std::set<std::string> wanted;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    if (cur == "all") {
      for (auto s : kStageOrder) wanted.emplace(s);
    } else if (std::find(std::begin(kStageOrder), std::end(kStageOrder), cur) == std::end(kStageOrder)) {
      throw std::runtime_error("unknown stage: " + cur);
    } else {
      wanted.insert(cur);
    }
    cur.clear();
  };
  for (char c : list) {
    if (c == ',' || c == ' ') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  std::vector<std::string> out;
  for (auto s : kStageOrder) {
    if (wanted.contains(std::string(s))) out.emplace_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// In-memory analysis

GraphBundle build_graphs(const CorpusSnapshot& snap) {
  auto acn = build_acn(snap);
  auto accn = build_accn(snap);
  auto vccn = build_vccn(snap);
  auto pr_acn = pagerank(acn);
  auto pr_accn = pagerank(accn);
  auto pr_vccn = pagerank(vccn);
  return {std::move(acn), std::move(accn), std::move(vccn), std::move(pr_acn), std::move(pr_accn), std::move(pr_vccn)};
}

namespace {

// Papers of the cohort before t, in corpus order.
std::vector<std::size_t> cohort_papers(const CorpusSnapshot& snap, std::span<const AuthorId> cohort) {
  std::vector<std::size_t> papers;
  for (AuthorId a : cohort) {
    auto mine = snap.papers_of(a);
    papers.insert(papers.end(), mine.begin(), mine.end());
  }
  std::sort(papers.begin(), papers.end());
  papers.erase(std::unique(papers.begin(), papers.end()), papers.end());
  return papers;
}

std::vector<AuthorTopicProfile> make_profiles(const CorpusSnapshot& snap, const TopicModel& model,
                                              std::span<const AuthorId> cohort, int m) {
  std::vector<AuthorTopicProfile> profiles;
  for (AuthorId a : cohort) {
    std::vector<PaperId> ids;
    for (std::size_t i : snap.papers_of(a)) ids.push_back(snap.corpus().paper(i).id);
    profiles.push_back(author_topic_profile(model, a, ids, m));
  }
  return profiles;
}

} // namespace

void fit_topics(const Corpus& corpus, const PipelineConfig& config, CohortAnalysis& out) {
  out.cohort = identify_cohort(corpus, config.cohort.t_1st);
  if (out.cohort.empty()) throw std::runtime_error(fmt::format("no authors first-authored a paper in {}", config.cohort.t_1st));
  const CorpusSnapshot snap(corpus, config.cohort.t);
  const auto papers = cohort_papers(snap, out.cohort);
  std::vector<PaperId> ids;
  std::vector<std::vector<std::string>> tokens;
  for (std::size_t i : papers) {
    ids.push_back(corpus.paper(i).id);
    tokens.push_back(tokenize(corpus.paper(i).title, corpus.paper(i).abstract));
  }
  const auto vocab = build_vocabulary(tokens, 2);
  const auto docs = make_documents(vocab, ids, tokens);
  out.topic_model = fit_lda(docs, vocab, config.lda_params());
  out.profiles = make_profiles(snap, out.topic_model, out.cohort, config.topics.m);
  out.groups = divide_researchers(out.profiles, config.topics.R, config.topics.m);
}

CohortAnalysis analyze_cohort(const Corpus& corpus, const PipelineConfig& config) {
  CohortAnalysis out;
  fit_topics(corpus, config, out);
  const CorpusSnapshot snap(corpus, config.cohort.t);
  const auto g = build_graphs(snap);
  FeatureInputs in{&corpus, config.cohort.t, &snap, &g.acn, &g.pr_acn, &g.pr_accn, &g.pr_vccn, &out.topic_model};
  out.raw = extract_features(in, out.cohort);
  out.labels = citation_increments(corpus, out.raw.authors, config.cohort.t, config.cohort.delta_t);
  return out;
}

// ---------------------------------------------------------------------------
// File-based stages

namespace {

struct Workdir {
  fs::path root;
  std::string hash;

  fs::path marker(std::string_view stage) const { return root / "stages" / (std::string(stage) + ".json"); }
};

struct StageRecord {
  std::map<std::string, std::string> inputs;   // relative path -> hash
  std::map<std::string, std::string> outputs;
  std::uint64_t seed = 0;
};

std::string rel(const Workdir& wd, const fs::path& p) { return fs::relative(p, wd.root).generic_string(); }

void require_stage(const Workdir& wd, std::string_view stage) {
  const auto m = wd.marker(stage);
  if (!fs::exists(m)) throw std::runtime_error("missing artifacts of stage " + std::string(stage) + "; run stage: " + std::string(stage));
  const auto j = json::parse(read_file(m));
  if (j.at("config_hash").get<std::string>() != wd.hash) {
    throw std::runtime_error("artifacts of stage " + std::string(stage) +
                             " come from a different config; run stage: " + std::string(stage));
  }
  for (const auto& [path, h] : j.at("outputs").items()) {
    const auto p = wd.root / path;
    if (!fs::exists(p) || file_hash(p) != h.get<std::string>()) {
      throw std::runtime_error("artifact " + path + " is missing or modified; run stage: " + std::string(stage));
    }
  }
}

void write_output(const Workdir& wd, StageRecord& rec, const fs::path& p, std::string_view content) {
  write_file(p, content);
  rec.outputs[rel(wd, p)] = hash_hex(fnv1a(content));
}

void note_input(const Workdir& wd, StageRecord& rec, const fs::path& p) {
  const auto key = p.is_absolute() && rel(wd, p).rfind("..", 0) == 0 ? p.generic_string() : rel(wd, p);
  rec.inputs[key] = file_hash(p);
}

void finish_stage(const Workdir& wd, std::string_view stage, const StageRecord& rec, double seconds) {
  ojson marker;
  marker["stage"] = stage;
  marker["config_hash"] = wd.hash;
  marker["inputs"] = rec.inputs;
  marker["outputs"] = rec.outputs;
  marker["seed"] = rec.seed;
  write_file(wd.marker(stage), marker.dump(1) + "\n");

  // Manifest: one line per stage, latest run wins, stage order.
  const auto manifest_path = wd.root / "manifest.jsonl";
  std::map<std::string, std::string> lines;
  if (fs::exists(manifest_path)) {
    std::istringstream in(read_file(manifest_path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) lines[json::parse(line).at("stage").get<std::string>()] = line;
    }
  }
  ojson entry = marker;
  entry["seconds"] = seconds;
  lines[std::string(stage)] = entry.dump();
  std::string text;
  for (auto s : kStageOrder) {
    auto it = lines.find(std::string(s));
    if (it != lines.end()) text += it->second + "\n";
  }
  write_file(manifest_path, text);
}

Corpus load_input_corpus(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  const auto path = config.corpus_path();
  if (!fs::exists(path)) throw std::runtime_error("corpus file not found: " + path.string());
  note_input(wd, rec, path);
  return load_corpus(path);
}

std::string pagerank_csv(const GraphBundle& g) {
  std::string out = "graph,node,score\n";
  auto emit = [&](const char* name, const PageRankScores& pr) {
    for (std::size_t i = 0; i < pr.nodes.size(); ++i) out += fmt::format("{},{},{:.17g}\n", name, pr.nodes[i], pr.scores[i]);
  };
  emit("acn", g.pr_acn);
  emit("accn", g.pr_accn);
  emit("vccn", g.pr_vccn);
  return out;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::map<std::string, PageRankScores> read_pagerank(const fs::path& p) {
  std::map<std::string, PageRankScores> out;
  for (const auto& r : read_csv_rows(p)) {
    auto& pr = out[r.at(0)];
    pr.nodes.push_back(std::stoll(r.at(1)));
    pr.scores.push_back(std::stod(r.at(2)));
  }
  return out;
}

WeightedDigraph read_acn(const fs::path& edges_path, const fs::path& pagerank_path) {
  std::vector<Edge> edges;
  for (const auto& r : read_csv_rows(edges_path)) edges.push_back({std::stoll(r.at(0)), std::stoll(r.at(1)), std::stod(r.at(2))});
  std::vector<std::int64_t> nodes;
  for (const auto& r : read_csv_rows(pagerank_path)) {
    if (r.at(0) == "acn") nodes.push_back(std::stoll(r.at(1)));
  }
  return {Orientation::undirected, std::move(nodes), std::move(edges)};
}

std::string groups_csv(std::span<const std::vector<AuthorId>> groups) {
  std::string out = "topic,author_id\n";
  for (std::size_t r = 0; r < groups.size(); ++r) {
    for (AuthorId a : groups[r]) out += fmt::format("{},{}\n", r + 1, a);
  }
  return out;
}

std::vector<std::vector<AuthorId>> read_groups(const fs::path& p, int topics) {
  std::vector<std::vector<AuthorId>> groups(static_cast<std::size_t>(topics));
  for (const auto& r : read_csv_rows(p)) {
    const auto t = std::stoul(r.at(0));
    if (t < 1 || t > groups.size()) throw std::runtime_error("groups.csv: topic out of range");
    groups[t - 1].push_back(std::stoll(r.at(1)));
  }
  return groups;
}

std::string labels_csv(std::span<const IncrementLabel> labels) {
  std::string out = "author_id,s\n";
  for (const auto& l : labels) out += fmt::format("{},{}\n", l.author, l.s);
  return out;
}

struct LoadedFeatures {
  EvalData data;
  std::vector<std::vector<AuthorId>> groups;
  std::vector<TopicSplit> splits;
};

LoadedFeatures load_features(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  const auto raw_path = wd.root / "features" / "raw.csv";
  const auto tr_path = wd.root / "features" / "transformed.csv";
  const auto labels_path = wd.root / "features" / "labels.csv";
  const auto groups_path = wd.root / "topics" / "groups.csv";
  for (const auto& p : {raw_path, tr_path, labels_path, groups_path}) note_input(wd, rec, p);

  LoadedFeatures out;
  out.data.raw = feature_matrix_from_csv(read_file(raw_path));
  out.data.transformed = feature_matrix_from_csv(read_file(tr_path));
  if (!out.data.transformed.transformed || out.data.transformed.authors != out.data.raw.authors) {
    throw std::runtime_error("features/transformed.csv does not match features/raw.csv; run stage: features");
  }
  out.data.labels.assign(out.data.raw.size(), 0.0);
  for (const auto& r : read_csv_rows(labels_path)) {
    out.data.labels[out.data.raw.row_of(std::stoll(r.at(0)))] = std::stod(r.at(1));
  }
  out.groups = read_groups(groups_path, config.topics.R);
  out.splits = make_splits(out.groups, out.data.raw, config.split_spec());
  return out;
}

fs::path iirl_model_path(const Workdir& wd, int topic) { return wd.root / "models" / fmt::format("iirl_topic_{}.json", topic); }
fs::path pointwise_model_path(const Workdir& wd, int topic) {
  return wd.root / "models" / fmt::format("pointwise_topic_{}.json", topic);
}

void stage_graphs(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  const auto corpus = load_input_corpus(config, wd, rec);
  const CorpusSnapshot snap(corpus, config.cohort.t);
  const auto g = build_graphs(snap);
  write_output(wd, rec, wd.root / "graphs" / "acn.csv", g.acn.to_csv());
  write_output(wd, rec, wd.root / "graphs" / "accn.csv", g.accn.to_csv());
  write_output(wd, rec, wd.root / "graphs" / "vccn.csv", g.vccn.to_csv());
  write_output(wd, rec, wd.root / "graphs" / "pagerank.csv", pagerank_csv(g));
}

void stage_topics(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  const auto corpus = load_input_corpus(config, wd, rec);
  CohortAnalysis a;
  fit_topics(corpus, config, a);
  rec.seed = config.topics.seed;
  write_output(wd, rec, wd.root / "topics" / "model.json", to_json(a.topic_model));
  write_output(wd, rec, wd.root / "topics" / "top_words.txt", top_words_table(a.topic_model, 5));
  write_output(wd, rec, wd.root / "topics" / "groups.csv", groups_csv(a.groups));
}

void stage_features(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  require_stage(wd, "graphs");
  require_stage(wd, "topics");
  const auto corpus = load_input_corpus(config, wd, rec);
  const auto acn_path = wd.root / "graphs" / "acn.csv";
  const auto pr_path = wd.root / "graphs" / "pagerank.csv";
  const auto model_path = wd.root / "topics" / "model.json";
  for (const auto& p : {acn_path, pr_path, model_path}) note_input(wd, rec, p);

  const CorpusSnapshot snap(corpus, config.cohort.t);
  const auto acn = read_acn(acn_path, pr_path);
  auto pr = read_pagerank(pr_path);
  const auto model = topic_model_from_json(read_file(model_path));
  const auto cohort = identify_cohort(corpus, config.cohort.t_1st);
  FeatureInputs in{&corpus, config.cohort.t, &snap, &acn, &pr["acn"], &pr["accn"], &pr["vccn"], &model};
  const auto raw = extract_features(in, cohort);
  const auto labels = citation_increments(corpus, raw.authors, config.cohort.t, config.cohort.delta_t);

  write_output(wd, rec, wd.root / "features" / "raw.csv", to_csv(raw));
  write_output(wd, rec, wd.root / "features" / "transformed.csv", to_csv(log_transform(raw)));
  write_output(wd, rec, wd.root / "features" / "labels.csv", labels_csv(labels));
  ojson prov;
  prov["snapshot_year"] = config.cohort.t;
  prov["config_hash"] = wd.hash;
  prov["corpus_hash"] = file_hash(config.corpus_path());
  prov["graph_hash"] = file_hash(pr_path);
  prov["acn_hash"] = file_hash(acn_path);
  prov["topic_model_hash"] = file_hash(model_path);
  prov["authors"] = raw.size();
  write_output(wd, rec, wd.root / "features" / "provenance.json", prov.dump(1) + "\n");
}

void stage_train(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  require_stage(wd, "features");
  require_stage(wd, "topics");
  const auto f = load_features(config, wd, rec);
  const auto settings = config.train_settings();
  rec.seed = config.train.seed;
  for (const auto& s : f.splits) {
    const auto t = train_topic(s, f.data, settings);
    write_output(wd, rec, iirl_model_path(wd, s.topic), to_json(t.iirl));
    ojson pw;
    pw["weights"] = t.pointwise;
    pw["ridge"] = settings.ridge;
    write_output(wd, rec, pointwise_model_path(wd, s.topic), pw.dump(1) + "\n");
  }
}

void stage_evaluate(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  require_stage(wd, "features");
  require_stage(wd, "topics");
  require_stage(wd, "train");
  const auto f = load_features(config, wd, rec);
  std::vector<TrainedTopic> trained;
  for (const auto& s : f.splits) {
    TrainedTopic t;
    t.topic = s.topic;
    const auto ip = iirl_model_path(wd, s.topic);
    const auto pp = pointwise_model_path(wd, s.topic);
    if (!fs::exists(ip) || !fs::exists(pp)) throw std::runtime_error("missing model for topic " + std::to_string(s.topic) + "; run stage: train");
    note_input(wd, rec, ip);
    note_input(wd, rec, pp);
    t.iirl = iirl_model_from_json(read_file(ip));
    t.pointwise = json::parse(read_file(pp)).at("weights").get<Weights>();
    trained.push_back(std::move(t));
  }
  rec.seed = config.eval.seed;
  const auto settings = config.train_settings();
  std::vector<EvalReport> all;
  for (auto m : {Method::iirl, Method::base1, Method::base2, Method::pointwise}) {
    auto reps = evaluate_method(m, f.splits, f.data, config.eval.k, settings, trained, config.eval.seed);
    all.insert(all.end(), reps.begin(), reps.end());
  }
  write_output(wd, rec, wd.root / "reports" / "evaluation.json", reports_to_json(all));
  write_output(wd, rec, wd.root / "reports" / "evaluation.txt", reports_to_table(all));
}

void stage_ablate(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  require_stage(wd, "features");
  require_stage(wd, "topics");
  const auto f = load_features(config, wd, rec);
  rec.seed = config.train.seed;
  const auto settings = config.train_settings();
  std::vector<std::string> names;
  for (auto g : kFeatureGroups) names.emplace_back(group_name(g));
  auto columns = ablation(names, AblationMode::keep, f.splits, f.data, settings, 10.0);
  auto drop = ablation(names, AblationMode::drop, f.splits, f.data, settings, 10.0);
  columns.insert(columns.end(), drop.begin(), drop.end());
  AblationColumn all{"All", {}};
  const double ks[] = {10.0};
  for (const auto& s : f.splits) {
    const auto t = train_topic(s, f.data, settings);
    all.precision.push_back(
        score_report(s.topic, "IIRL", f.data, s.test_rows, method_scores(Method::iirl, f.data, s.test_rows, &t), ks)
            .precision.front());
  }
  columns.push_back(std::move(all));
  write_output(wd, rec, wd.root / "reports" / "ablation.csv", ablation_grid_csv(f.splits, columns));
}

void stage_transfer(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  require_stage(wd, "features");
  require_stage(wd, "topics");
  const auto f = load_features(config, wd, rec);
  rec.seed = config.train.seed;
  const auto rows = transfer_experiment(f.splits, f.data, config.eval.r_hat, config.eval.k, config.train_settings());
  write_output(wd, rec, wd.root / "reports" / "transfer.json", transfer_to_json(rows, config.eval.r_hat, config.eval.k));
}

void stage_correlate(const PipelineConfig& config, const Workdir& wd, StageRecord& rec) {
  require_stage(wd, "features");
  const auto raw_path = wd.root / "features" / "raw.csv";
  const auto labels_path = wd.root / "features" / "labels.csv";
  note_input(wd, rec, raw_path);
  note_input(wd, rec, labels_path);
  const auto raw = feature_matrix_from_csv(read_file(raw_path));
  std::vector<double> labels(raw.size(), 0.0);
  for (const auto& r : read_csv_rows(labels_path)) labels[raw.row_of(std::stoll(r.at(0)))] = std::stod(r.at(1));
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    const auto rows = correlation_report(raw.column(k), labels, config.eval.min_group);
    write_output(wd, rec, wd.root / "reports" / "correlation" / (feature_name(k) + ".csv"), correlation_csv(rows));
  }
}

} // namespace

void run_pipeline(const PipelineConfig& config, const std::vector<std::string>& stages) {
  Workdir wd{fs::path(config.paths.workdir), config_hash(config)};
  fs::create_directories(wd.root);
  write_file(wd.root / "config.resolved.json", config_to_json(config));
  const std::map<std::string, std::function<void(const PipelineConfig&, const Workdir&, StageRecord&)>> table = {
      {"graphs", stage_graphs},     {"topics", stage_topics},     {"features", stage_features},
      {"train", stage_train},       {"evaluate", stage_evaluate}, {"ablate", stage_ablate},
      {"transfer", stage_transfer}, {"correlate", stage_correlate}};
  for (auto name : kStageOrder) {
    if (std::find(stages.begin(), stages.end(), name) == stages.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    StageRecord rec;
    table.at(std::string(name))(config, wd, rec);
    finish_stage(wd, name, rec, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
}

std::string report(const fs::path& workdir) {
  const auto eval_path = workdir / "reports" / "evaluation.json";
  if (!fs::exists(eval_path)) throw std::runtime_error("nothing to report in " + workdir.string() + "; run stage: evaluate");
  const auto reports = reports_from_json(read_file(eval_path));
  if (reports.empty()) throw std::runtime_error("evaluation report is empty");

  // Pivot: one row per topic, one column per (method, k).
  std::vector<std::string> methods;
  std::map<int, std::map<std::string, std::vector<double>>> grid;
  for (const auto& r : reports) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    grid[r.topic][r.method] = r.precision;
  }
  const auto& ks = reports.front().ks;
  std::string out = "Pre@k% per topic\n";
  out += fmt::format("{:<8}", "topic");
  for (const auto& m : methods) {
    for (double k : ks) out += fmt::format("{:>16}", fmt::format("{}@{}%", m, k));
  }
  out += "\n";
  auto emit_row = [&](int topic) {
    out += fmt::format("{:<8}", topic == 0 ? std::string("avg") : std::to_string(topic));
    for (const auto& m : methods) {
      const auto it = grid[topic].find(m);
      for (std::size_t i = 0; i < ks.size(); ++i) {
        out += it == grid[topic].end() ? fmt::format("{:>16}", "-") : fmt::format("{:>16.4f}", it->second[i]);
      }
    }
    out += "\n";
  };
  for (const auto& [topic, row] : grid) {
    if (topic != 0) emit_row(topic);
  }
  if (grid.contains(0)) emit_row(0);

  const auto ablation_path = workdir / "reports" / "ablation.csv";
  if (fs::exists(ablation_path)) out += "\nFeature-group ablation (IIRL Pre@10%)\n" + read_file(ablation_path);

  const auto transfer_path = workdir / "reports" / "transfer.json";
  if (fs::exists(transfer_path)) {
    const auto j = json::parse(read_file(transfer_path));
    const auto tks = j.at("k").get<std::vector<double>>();
    out += fmt::format("\nTransfer from topic {} (IIRL)\n{:<8}", j.at("r_hat").get<int>(), "topic");
    for (double k : tks) out += fmt::format("{:>14}{:>14}", fmt::format("own@{}%", k), fmt::format("r_hat@{}%", k));
    out += "\n";
    for (const auto& row : j.at("rows")) {
      out += fmt::format("{:<8}", row.at("topic").get<int>());
      const auto own = row.at("own").get<std::vector<double>>();
      const auto tr = row.at("transfer").get<std::vector<double>>();
      for (std::size_t i = 0; i < tks.size(); ++i) out += fmt::format("{:>14.4f}{:>14.4f}", own[i], tr[i]);
      out += "\n";
    }
  }
  write_file(workdir / "reports" / "summary.txt", out);
  return out;
}

} // namespace ars
