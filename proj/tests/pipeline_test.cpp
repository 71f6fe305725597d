#include "ars/pipeline.hpp"
#include "ars/util.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace ars;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

PipelineConfig small_config(const fs::path& workdir) {
  auto c = parse_config_text(R"({
    "topics": {"iterations": 30},
    "train": {"epochs": 10},
    "synth": {"n_authors": 300, "seed": 4}
  })");
  c.paths.workdir = workdir.string();
  return c;
}

PipelineConfig prepared(const fs::path& workdir) {
  auto c = small_config(workdir);
  write_synthetic(*c.synth, c.corpus_path());
  return c;
}

std::string manifest_without_timing(const fs::path& workdir) {
  std::istringstream in(read_file(workdir / "manifest.jsonl"));
  std::string out;
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::ordered_json::parse(line);
    j.erase("seconds");
    out += j.dump() + "\n";
  }
  return out;
}

} // namespace

TEST(Config, EmptyMeansDefaults) {
  const auto c = parse_config_text("");
  EXPECT_EQ(c.cohort.t, 2008);
  EXPECT_EQ(c.cohort.t_1st, 2006);
  EXPECT_EQ(c.cohort.delta_t, 4);
  EXPECT_EQ(c.topics.R, 10);
  EXPECT_EQ(c.topics.m, 3);
  EXPECT_DOUBLE_EQ(c.train.alpha, 0.01);
  EXPECT_DOUBLE_EQ(c.train.lambda_w, 0.01);
  EXPECT_EQ(c.eval.k, (std::vector<double>{10, 20}));
  EXPECT_FALSE(c.synth.has_value());
  EXPECT_EQ(config_to_json(parse_config_text("{}")), config_to_json(c));
}

TEST(Config, KeysAndErrors) {
  EXPECT_EQ(parse_config_text(R"({"cohort": {"delta_t": 4}})").cohort.delta_t, 4);
  EXPECT_EQ(parse_config_text(R"({"cohort": {"delta_t": 2}})").cohort.delta_t, 2);
  EXPECT_EQ(error_of([] { parse_config_text(R"({"cohrot": {}})"); }), "unknown key: cohrot");
  EXPECT_EQ(error_of([] { parse_config_text(R"({"cohort": {"tt": 1}})"); }), "unknown key: cohort.tt");
  EXPECT_EQ(error_of([] { parse_config_text(R"({"cohort": {"t": "2008"}})"); }), "key cohort.t: expected integer");
  EXPECT_EQ(error_of([] { parse_config_text(R"({"train": {"alpha": true}})"); }), "key train.alpha: expected number");
  EXPECT_NE(error_of([] { parse_config_text(R"({"cohort": {"t": 2005}})"); }).find("t_1st"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config_text("{oops"); }).find("not valid JSON"), std::string::npos);
}

TEST(Config, EnvironmentOverrides) {
  auto c = parse_config_text("");
  apply_overrides(c, {"ARS_COHORT_DELTA_T=3", "ARS_EVAL_K=5,15", "ARS_TOPICS_R=6", "ARS_PATHS_WORKDIR=/tmp/x",
                      "PATH=/bin", "ARS_SYNTH_N_AUTHORS=50"});
  EXPECT_EQ(c.cohort.delta_t, 3);
  EXPECT_EQ(c.eval.k, (std::vector<double>{5, 15}));
  EXPECT_EQ(c.topics.R, 6);
  EXPECT_EQ(c.paths.workdir, "/tmp/x");
  ASSERT_TRUE(c.synth.has_value());
  EXPECT_EQ(c.synth->n_authors, 50);
  EXPECT_EQ(error_of([&] { apply_overrides(c, {"ARS_COHORT_FOO=1"}); }), "unknown key: cohort.foo");

  std::vector<std::string> env_strings{"ARS_TRAIN_EPOCHS=12", "HOME=/root"};
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  apply_env_overrides(c, envp.data());
  EXPECT_EQ(c.train.epochs, 12);
}

TEST(Config, SeedsAndHash) {
  auto c = parse_config_text(R"({"synth": {}})");
  const auto h = config_hash(c);
  c.paths.workdir = "elsewhere";
  EXPECT_EQ(config_hash(c), h);
  override_seeds(c, 77);
  EXPECT_EQ(c.topics.seed, 77u);
  EXPECT_EQ(c.train.seed, 77u);
  EXPECT_EQ(c.eval.seed, 77u);
  EXPECT_EQ(c.synth->seed, 77u);
  EXPECT_NE(config_hash(c), h);
}

TEST(Stages, Parsing) {
  EXPECT_EQ(parse_stages("all").size(), std::size(kStageOrder));
  EXPECT_EQ(parse_stages("evaluate,graphs"), (std::vector<std::string>{"graphs", "evaluate"}));
  EXPECT_EQ(error_of([] { parse_stages("graphs,plot"); }), "unknown stage: plot");
}

TEST(Pipeline, MissingPrerequisiteNamesStage) {
  testing_support::TempDir dir("pipe");
  const auto c = prepared(dir.path());
  EXPECT_NE(error_of([&] { run_pipeline(c, {"evaluate"}); }).find("run stage: features"), std::string::npos);
  EXPECT_NE(error_of([&] { run_pipeline(c, {"features"}); }).find("run stage: graphs"), std::string::npos);
  run_pipeline(c, {"graphs", "topics", "features"});
  EXPECT_NE(error_of([&] { run_pipeline(c, {"evaluate"}); }).find("run stage: train"), std::string::npos);
}

TEST(Pipeline, StaleArtifactsRefused) {
  testing_support::TempDir dir("stale");
  auto c = prepared(dir.path());
  run_pipeline(c, {"graphs", "topics", "features"});
  auto changed = c;
  changed.cohort.delta_t = 3;
  const auto msg = error_of([&] { run_pipeline(changed, {"train"}); });
  EXPECT_NE(msg.find("different config"), std::string::npos) << msg;
  EXPECT_NE(msg.find("run stage: features"), std::string::npos) << msg;

  write_file(dir.path() / "features" / "raw.csv", "tampered\n");
  EXPECT_NE(error_of([&] { run_pipeline(c, {"train"}); }).find("modified"), std::string::npos);
}

TEST(Pipeline, FullRunLayoutAndGoldenManifest) {
  testing_support::TempDir dir("full");
  const auto c = prepared(dir.path());
  run_pipeline(c, parse_stages("all"));
  for (auto sub : {"graphs/acn.csv", "graphs/pagerank.csv", "topics/model.json", "topics/groups.csv",
                   "features/raw.csv", "features/transformed.csv", "features/labels.csv", "features/provenance.json",
                   "models/iirl_topic_1.json", "reports/evaluation.json", "reports/evaluation.txt",
                   "reports/ablation.csv", "reports/transfer.json", "reports/correlation/F1.csv", "manifest.jsonl"}) {
    EXPECT_TRUE(fs::exists(dir.path() / sub)) << sub;
  }
  for (auto stage : kStageOrder) EXPECT_TRUE(fs::exists(dir.path() / "stages" / (std::string(stage) + ".json")));

  const auto manifest = manifest_without_timing(dir.path());
  const auto golden = testing_support::golden("small_manifest.jsonl");
  if (std::getenv("ARS_UPDATE_GOLDEN")) write_file(golden, manifest);
  ASSERT_TRUE(fs::exists(golden)) << "run once with ARS_UPDATE_GOLDEN=1 to freeze";
  EXPECT_EQ(manifest, read_file(golden));

  const auto summary = report(dir.path());
  EXPECT_NE(summary.find("IIRL@10%"), std::string::npos);
  EXPECT_NE(summary.find("+Temporal"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path() / "reports" / "summary.txt"));
}

TEST(Pipeline, RerunIsIdentical) {
  testing_support::TempDir a("rerun_a"), b("rerun_b");
  const auto ca = prepared(a.path());
  const auto cb = prepared(b.path());
  const auto stages = parse_stages("graphs,topics,features,train,evaluate");
  run_pipeline(ca, stages);
  run_pipeline(cb, stages);
  for (auto f : {"features/raw.csv", "features/transformed.csv", "models/iirl_topic_2.json", "reports/evaluation.json"}) {
    EXPECT_EQ(read_file(a.path() / f), read_file(b.path() / f)) << f;
  }
}

TEST(Report, EmptyWorkdirAndSingleTopic) {
  testing_support::TempDir dir("report");
  EXPECT_NE(error_of([&] { report(dir.path()); }).find("run stage: evaluate"), std::string::npos);
  EvalReport r;
  r.topic = 1;
  r.method = "IIRL";
  r.ks = {10};
  r.precision = {0.5};
  r.n_test = 4;
  r.true_sizes = {1};
  const std::vector<EvalReport> one{r};
  write_file(dir.path() / "reports" / "evaluation.json", reports_to_json(one));
  const auto text = report(dir.path());
  std::istringstream in(text);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 3u);  // title, header, one topic row
  EXPECT_EQ(lines[2].substr(0, 1), "1");
}

TEST(Cli, ExitStatusAndMessages) {
  testing_support::TempDir dir("cli");
  const std::string cli = ARS_CLI_PATH;
  const auto err = dir.path() / "err.txt";
  const std::string base = "cd '" + dir.path().string() + "' && ";
  auto run = [&](const std::string& args) {
    return std::system((base + "'" + cli + "' " + args + " > out.txt 2> '" + err.string() + "'").c_str());
  };
  EXPECT_NE(run("run --stages evaluate --workdir w"), 0);
  EXPECT_NE(read_file(err).find("run stage: features"), std::string::npos);
  EXPECT_NE(run("run --stages nothing"), 0);
  EXPECT_NE(run("bogus"), 0);

  write_file(dir.path() / "cfg.json", R"({"synth": {"n_authors": 150}, "topics": {"iterations": 10}})");
  EXPECT_EQ(run("synth --config cfg.json --workdir w --seed 3"), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "w" / "corpus.jsonl"));
  EXPECT_EQ(run("run --config cfg.json --workdir w --seed 3 --stages graphs,topics"), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "w" / "topics" / "groups.csv"));
  const auto seeded = read_file(dir.path() / "w" / "config.resolved.json");
  EXPECT_NE(seeded.find("\"seed\": 3"), std::string::npos);
  EXPECT_EQ(std::system((base + "ARS_COHORT_DELTA_T=zero '" + cli + "' run --stages graphs 2>/dev/null").c_str()) == 0,
            false);
}
