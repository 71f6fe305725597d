#pragma once

#include "ars/corpus.hpp"

#include <unistd.h>

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(ARS_TEST_DATA) / "fixtures" / name;
}
inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(ARS_TEST_DATA) / "golden" / name;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ars_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Hand-assembled corpora with automatic ids.
struct CorpusBuilder {
  std::vector<ars::PaperRecord> papers;
  ars::PaperId next = 1;

  ars::PaperId add(int year, std::vector<ars::AuthorId> authors, std::vector<ars::PaperId> refs = {},
                   std::optional<ars::VenueId> venue = std::nullopt, std::string title = "",
                   std::string abstract = "") {
    ars::PaperRecord p;
    p.id = next++;
    p.year = year;
    p.authors = std::move(authors);
    p.refs = std::move(refs);
    p.venue = venue;
    p.title = std::move(title);
    p.abstract = std::move(abstract);
    papers.push_back(std::move(p));
    return papers.back().id;
  }

  // `count` single-author papers by fresh authors citing `target`.
  void cite(int year, ars::PaperId target, int count, ars::AuthorId& fresh_author) {
    for (int i = 0; i < count; ++i) add(year, {fresh_author++}, {target});
  }

  ars::Corpus build() const { return ars::Corpus(papers); }
};

// Author 1 and author 2 of the temporal fixture, with t = 2008:
//  author 1: n = 2/5/12 papers before 2006/2007/2008, c = 56/99/134
//  author 2: n = 2/4/6,  c = 121/225/319
inline ars::Corpus temporal_fixture() {
  CorpusBuilder b;
  ars::AuthorId fresh = 1000;
  auto papers_for = [&](ars::AuthorId a, std::initializer_list<std::pair<int, int>> per_year) {
    std::vector<ars::PaperId> ids;
    for (auto [year, n] : per_year) {
      for (int i = 0; i < n; ++i) ids.push_back(b.add(year, {a}));
    }
    return ids;
  };
  auto a1 = papers_for(1, {{2005, 2}, {2006, 3}, {2007, 7}});
  b.cite(2005, a1[0], 56, fresh);
  b.cite(2006, a1[1], 43, fresh);
  b.cite(2007, a1[2], 35, fresh);
  auto a2 = papers_for(2, {{2005, 2}, {2006, 2}, {2007, 2}});
  b.cite(2005, a2[0], 121, fresh);
  b.cite(2006, a2[1], 104, fresh);
  b.cite(2007, a2[2], 94, fresh);
  return b.build();
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

} // namespace testing_support
