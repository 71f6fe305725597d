#include "ars/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace ars {

namespace {

PaperRecord parse_paper(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("expected a JSON object");
  auto int_field = [&](const char* key) -> std::int64_t {
    if (!j.contains(key)) throw std::runtime_error(std::string("missing key '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw std::runtime_error(std::string("key '") + key + "' must be an integer");
    return v.get<std::int64_t>();
  };
  auto str_field = [&](const char* key) -> std::string {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    const auto& v = j.at(key);
    if (!v.is_string()) throw std::runtime_error(std::string("key '") + key + "' must be a string");
    return v.get<std::string>();
  };
  auto id_array = [&](const char* key) -> std::vector<std::int64_t> {
    std::vector<std::int64_t> out;
    if (!j.contains(key)) return out;
    const auto& v = j.at(key);
    if (!v.is_array()) throw std::runtime_error(std::string("key '") + key + "' must be an array");
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw std::runtime_error(std::string("key '") + key + "' must hold integers");
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  };

  PaperRecord p;
  p.id = int_field("id");
  p.year = static_cast<int>(int_field("year"));
  p.title = str_field("title");
  p.abstract = str_field("abstract");
  if (j.contains("venue") && !j.at("venue").is_null()) p.venue = int_field("venue");
  if (!j.contains("authors")) throw std::runtime_error("missing key 'authors'");
  for (AuthorId a : id_array("authors")) {
    if (std::find(p.authors.begin(), p.authors.end(), a) == p.authors.end()) p.authors.push_back(a);
  }
  if (p.authors.empty()) throw std::runtime_error("paper has no authors");
  std::unordered_set<PaperId> seen;
  for (PaperId r : id_array("refs")) {
    if (r == p.id) throw std::runtime_error("paper references itself");
    if (seen.insert(r).second) p.refs.push_back(r);
  }
  return p;
}

} // namespace

Corpus::Corpus(std::vector<PaperRecord> papers) : papers_(std::move(papers)) {
  by_id_.reserve(papers_.size());
  for (std::size_t i = 0; i < papers_.size(); ++i) {
    const auto& p = papers_[i];
    if (p.authors.empty()) throw std::runtime_error("paper " + std::to_string(p.id) + " has no authors");
    if (!by_id_.emplace(p.id, i).second) throw std::runtime_error("duplicate paper id " + std::to_string(p.id));
    min_year_ = min_year_ ? std::min(*min_year_, p.year) : p.year;
    max_year_ = max_year_ ? std::max(*max_year_, p.year) : p.year;
  }

  cited_by_.assign(papers_.size(), {});
  resolved_refs_.assign(papers_.size(), {});
  for (std::size_t i = 0; i < papers_.size(); ++i) {
    for (PaperId r : papers_[i].refs) {
      auto it = by_id_.find(r);
      if (it == by_id_.end()) continue;  // dangling
      if (papers_[it->second].year > papers_[i].year) {
        throw std::runtime_error("paper " + std::to_string(papers_[i].id) + " references later paper " +
                                 std::to_string(r));
      }
      resolved_refs_[i].push_back(it->second);
      cited_by_[it->second].push_back(i);
    }
  }

  for (std::size_t i = 0; i < papers_.size(); ++i) {
    for (AuthorId a : papers_[i].authors) by_author_[a].push_back(i);
  }
  author_ids_.reserve(by_author_.size());
  for (auto& [a, list] : by_author_) {
    std::stable_sort(list.begin(), list.end(),
                     [&](std::size_t x, std::size_t y) { return papers_[x].year < papers_[y].year; });
    author_ids_.push_back(a);
  }
  std::sort(author_ids_.begin(), author_ids_.end());
}

std::optional<std::size_t> Corpus::index_of(PaperId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> Corpus::papers_of(AuthorId author) const {
  auto it = by_author_.find(author);
  if (it == by_author_.end()) return {};
  return it->second;
}

Corpus parse_corpus(std::string_view text) {
  std::vector<PaperRecord> papers;
  std::unordered_set<PaperId> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    PaperRecord p;
    try {
      p = parse_paper(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(p.id).second) throw std::runtime_error("duplicate paper id " + std::to_string(p.id));
    papers.push_back(std::move(p));
  }
  return Corpus(std::move(papers));
}

Corpus load_corpus(const std::filesystem::path& path) { return parse_corpus(read_file(path)); }

std::string to_jsonl(const PaperRecord& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["title"] = p.title;
  j["abstract"] = p.abstract;
  j["year"] = p.year;
  j["venue"] = p.venue ? nlohmann::ordered_json(*p.venue) : nlohmann::ordered_json(nullptr);
  j["authors"] = p.authors;
  j["refs"] = p.refs;
  return j.dump();
}

CorpusSnapshot::CorpusSnapshot(const Corpus& corpus, int cutoff_year)
    : corpus_(&corpus), cutoff_(cutoff_year), included_(corpus.size(), false), citations_(corpus.size(), 0) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.paper(i).year < cutoff_) {
      included_[i] = true;
      papers_.push_back(i);
    }
  }
  for (std::size_t i : papers_) {
    for (std::size_t citing : corpus.cited_by(i)) {
      if (included_[citing]) ++citations_[i];
    }
  }
}

std::vector<std::size_t> CorpusSnapshot::papers_of(AuthorId author) const {
  std::vector<std::size_t> out;
  for (std::size_t i : corpus_->papers_of(author)) {
    if (included_[i]) out.push_back(i);
  }
  return out;
}

std::size_t CorpusSnapshot::paper_count(AuthorId author) const {
  std::size_t n = 0;
  for (std::size_t i : corpus_->papers_of(author)) n += included_[i] ? 1 : 0;
  return n;
}

std::size_t CorpusSnapshot::citation_count(AuthorId author) const {
  std::size_t c = 0;
  for (std::size_t i : corpus_->papers_of(author)) c += citations_[i];
  return c;
}

std::vector<AuthorId> identify_cohort(const Corpus& corpus, int t_1st) {
  std::unordered_map<AuthorId, int> first_year;
  for (const auto& p : corpus.papers()) {
    auto [it, inserted] = first_year.emplace(p.authors.front(), p.year);
    if (!inserted) it->second = std::min(it->second, p.year);
  }
  std::vector<AuthorId> out;
  for (const auto& [a, y] : first_year) {
    if (y == t_1st) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

IncrementLabel citation_increment(const Corpus& corpus, AuthorId author, int t, int delta_t) {
  const AuthorId one[] = {author};
  return citation_increments(corpus, one, t, delta_t).front();
}

std::vector<IncrementLabel> citation_increments(const Corpus& corpus, std::span<const AuthorId> authors, int t,
                                                int delta_t) {
  CorpusSnapshot before(corpus, t);
  CorpusSnapshot after(corpus, t + delta_t + 1);
  std::vector<IncrementLabel> out;
  out.reserve(authors.size());
  for (AuthorId a : authors) out.push_back({a, after.citation_count(a) - before.citation_count(a)});
  return out;
}

} // namespace ars
