#include "ars/synth.hpp"
#include "ars/util.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

using namespace ars;

namespace {

// Rank correlation between latent fitness and citations gained over the
// final four years of the corpus.
double fitness_increment_spearman(const SynthConfig& sc) {
  const auto result = generate_corpus(sc);
  const Corpus c(result.papers);
  const auto before = snapshot(c, sc.end_year - 3);
  const auto after = snapshot(c, sc.end_year + 1);
  std::vector<double> fit, inc;
  for (const auto& t : result.truth) {
    fit.push_back(t.fitness);
    inc.push_back(static_cast<double>(after.citation_count(t.author) - before.citation_count(t.author)));
  }
  return oracle::spearman(fit, inc);
}

} // namespace

TEST(Synth, SameSeedSameBytes) {
  SynthConfig sc;
  sc.n_authors = 300;
  const auto a = corpus_jsonl(generate_corpus(sc).papers);
  const auto b = corpus_jsonl(generate_corpus(sc).papers);
  EXPECT_EQ(a, b);
  sc.seed = 2;
  EXPECT_NE(a, corpus_jsonl(generate_corpus(sc).papers));
}

TEST(Synth, CitationsPointStrictlyBackInTime) {
  SynthConfig sc;
  sc.n_authors = 500;
  sc.start_year = 2003;
  sc.end_year = 2012;
  const auto r = generate_corpus(sc);
  std::map<PaperId, int> year;
  for (const auto& p : r.papers) year[p.id] = p.year;
  std::size_t refs = 0;
  for (const auto& p : r.papers) {
    for (auto ref : p.refs) {
      ASSERT_TRUE(year.contains(ref));
      EXPECT_GT(p.year, year[ref]);
      ++refs;
    }
  }
  EXPECT_GT(refs, 0u);
}

TEST(Synth, CohortIsPlanted) {
  SynthConfig sc;
  sc.n_authors = 300;
  const auto r = generate_corpus(sc);
  const Corpus c(r.papers);
  const auto cohort = identify_cohort(c, sc.cohort_year);
  EXPECT_GE(static_cast<double>(cohort.size()), 0.4 * sc.n_authors);
  EXPECT_EQ(r.truth.size(), static_cast<std::size_t>(sc.n_authors));
  for (const auto& t : r.truth) {
    EXPECT_GT(t.fitness, 0.0);
    EXPECT_GE(t.topic, 1);
    EXPECT_LE(t.topic, sc.topics);
  }
}

TEST(Synth, InvalidOrInfeasibleConfigs) {
  SynthConfig sc;
  sc.n_authors = 0;
  EXPECT_THROW(generate_corpus(sc), std::invalid_argument);
  sc = {};
  sc.signal = 1.5;
  EXPECT_THROW(generate_corpus(sc), std::invalid_argument);
  sc = {};
  sc.n_authors = 5;
  sc.refs_per_paper = 500;
  try {
    generate_corpus(sc);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("infeasible"), std::string::npos) << e.what();
  }
}

TEST(Synth, FilesRoundTripAndProvenance) {
  testing_support::TempDir dir("synth");
  SynthConfig sc;
  sc.n_authors = 200;
  const auto path = dir.path() / "corpus.jsonl";
  write_synthetic(sc, path);
  const auto c = load_corpus(path);
  EXPECT_EQ(c, Corpus(generate_corpus(sc).papers));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "truth.csv"));
  EXPECT_EQ(planted_truth(sc, path), generate_corpus(sc).truth);

  auto other = sc;
  other.seed = 9;
  EXPECT_THROW(planted_truth(other, path), std::runtime_error);

  write_file(path, read_file(path) + "\n");
  EXPECT_THROW(planted_truth(sc, path), std::runtime_error);

  const auto foreign = dir.path() / "foreign.jsonl";
  write_file(foreign, "{\"id\":1,\"year\":2000,\"authors\":[1]}\n");
  try {
    planted_truth(sc, foreign);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("missing provenance hash"), std::string::npos) << e.what();
  }
}

TEST(Synth, PlantedSignalDrivesIncrements) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig sc;
    sc.n_authors = 2000;
    sc.signal = 0.8;
    sc.seed = seed;
    EXPECT_GE(fitness_increment_spearman(sc), 0.5) << "seed " << seed;
  }
}

TEST(Synth, NoSignalMeansNoCorrelation) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig sc;
    sc.n_authors = 2000;
    sc.signal = 0.0;
    sc.seed = seed;
    EXPECT_LT(std::abs(fitness_increment_spearman(sc)), 0.1) << "seed " << seed;
  }
}

TEST(Synth, IndegreeIsHeavyTailed) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig sc;
    sc.n_authors = 2000;
    sc.signal = 0.0;
    sc.pa_exponent = 1.0;
    sc.seed = seed;
    const auto r = generate_corpus(sc);
    ASSERT_GE(r.papers.size(), 5000u);
    std::map<PaperId, double> indeg;
    for (const auto& p : r.papers) indeg[p.id] = 0;
    for (const auto& p : r.papers) {
      for (auto ref : p.refs) indeg[ref] += 1;
    }
    std::vector<double> d;
    for (auto& [id, v] : indeg) d.push_back(v);
    std::sort(d.rbegin(), d.rend());
    const double total = std::accumulate(d.begin(), d.end(), 0.0);
    const double top = std::accumulate(d.begin(), d.begin() + static_cast<long>(d.size() / 10), 0.0);
    EXPECT_GE(top / total, 0.4) << "seed " << seed;
  }
}
