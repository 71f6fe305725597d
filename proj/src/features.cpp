#include "ars/features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ars {

namespace {

double mean_or_zero(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

std::array<double, 4> temporal_from(const CorpusSnapshot& s0, const CorpusSnapshot& s1, const CorpusSnapshot& s2,
                                    AuthorId a) {
  const auto c0 = static_cast<double>(s0.citation_count(a));
  const auto c1 = static_cast<double>(s1.citation_count(a));
  const auto c2 = static_cast<double>(s2.citation_count(a));
  const auto n0 = static_cast<double>(s0.paper_count(a));
  const auto n1 = static_cast<double>(s1.paper_count(a));
  const auto n2 = static_cast<double>(s2.paper_count(a));
  return {c0 - c1, (c0 - c2) / 2.0, n0 - n1, (n0 - n2) / 2.0};
}

} // namespace

std::string feature_name(std::size_t column) { return "F" + std::to_string(column + 1); }

std::string_view group_name(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::author: return "Author";
    case FeatureGroup::social: return "Social";
    case FeatureGroup::venue: return "Venue";
    case FeatureGroup::content: return "Content";
    case FeatureGroup::temporal: return "Temporal";
  }
  return "?";
}

FeatureGroup parse_feature_group(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (auto g : kFeatureGroups) {
    std::string candidate;
    for (char c : group_name(g)) candidate.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (candidate == lower) return g;
  }
  throw std::invalid_argument("unknown feature group: " + std::string(name));
}

std::vector<std::size_t> group_columns(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::author: return {0, 1, 2};
    case FeatureGroup::social: return {3, 4, 5, 6, 7, 8};
    case FeatureGroup::venue: return {9, 10, 11};
    case FeatureGroup::content: return {12, 13};
    case FeatureGroup::temporal: return {14, 15, 16, 17};
  }
  return {};
}

std::vector<double> FeatureMatrix::column(std::size_t k) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(k));
  return out;
}

std::size_t FeatureMatrix::row_of(AuthorId author) const {
  auto it = std::lower_bound(authors.begin(), authors.end(), author);
  if (it == authors.end() || *it != author) throw std::out_of_range("author " + std::to_string(author) + " has no feature row");
  return static_cast<std::size_t>(it - authors.begin());
}

std::array<double, 3> author_features(const CorpusSnapshot& snap, AuthorId author) {
  const auto n = snap.paper_count(author);
  if (n == 0) throw std::invalid_argument("author " + std::to_string(author) + " has no papers before " +
                                          std::to_string(snap.cutoff_year()));
  const auto c = static_cast<double>(snap.citation_count(author));
  return {static_cast<double>(n), c, c / static_cast<double>(n)};
}

CoauthorIndex coauthor_index(const WeightedDigraph& acn) {
  CoauthorIndex index;
  for (const auto& e : acn.edges()) {
    index[e.src].push_back(e.dst);
    index[e.dst].push_back(e.src);
  }
  for (auto& [a, list] : index) std::sort(list.begin(), list.end());
  return index;
}

std::array<double, 6> social_features(const CorpusSnapshot& snap, const CoauthorIndex& coauthors,
                                      const PageRankScores& pr_acn, const PageRankScores& pr_accn, AuthorId author) {
  std::array<double, 6> f{};
  f[2] = pr_acn.score(author) * kPageRankScale;
  f[3] = pr_accn.score(author) * kPageRankScale;
  auto it = coauthors.find(author);
  if (it == coauthors.end() || it->second.empty()) return f;
  const auto& co = it->second;
  double cit = 0.0, acn = 0.0, accn = 0.0;
  for (AuthorId b : co) {
    cit += static_cast<double>(snap.citation_count(b));
    acn += pr_acn.score(b) * kPageRankScale;
    accn += pr_accn.score(b) * kPageRankScale;
  }
  f[0] = static_cast<double>(co.size());
  f[1] = mean_or_zero(cit, co.size());
  f[4] = mean_or_zero(acn, co.size());
  f[5] = mean_or_zero(accn, co.size());
  return f;
}

std::unordered_map<VenueId, double> venue_citations(const CorpusSnapshot& snap) {
  std::unordered_map<VenueId, std::pair<double, std::size_t>> acc;
  for (std::size_t i : snap.papers()) {
    const auto& v = snap.corpus().paper(i).venue;
    if (!v) continue;
    auto& slot = acc[*v];
    slot.first += static_cast<double>(snap.paper_citations(i));
    ++slot.second;
  }
  std::unordered_map<VenueId, double> out;
  for (const auto& [v, s] : acc) out.emplace(v, s.first / static_cast<double>(s.second));
  return out;
}

std::array<double, 3> venue_features(const CorpusSnapshot& snap, const std::unordered_map<VenueId, double>& venue_cit,
                                     const PageRankScores& pr_vccn, AuthorId author, int t) {
  double all = 0.0, recent = 0.0, pr = 0.0;
  std::size_t n_all = 0, n_recent = 0;
  for (std::size_t i : snap.papers_of(author)) {
    const auto& p = snap.corpus().paper(i);
    if (!p.venue) continue;
    auto it = venue_cit.find(*p.venue);
    const double vc = it == venue_cit.end() ? 0.0 : it->second;
    all += vc;
    pr += pr_vccn.score(*p.venue) * kPageRankScale;
    ++n_all;
    if (p.year == t - 1 || p.year == t - 2) {
      recent += vc;
      ++n_recent;
    }
  }
  return {mean_or_zero(all, n_all), mean_or_zero(recent, n_recent), mean_or_zero(pr, n_all)};
}

std::array<double, 2> content_features(const CorpusSnapshot& snap, const TopicModel& model, AuthorId author) {
  std::vector<std::vector<double>> rows;
  std::vector<double> cites;
  for (std::size_t i : snap.papers_of(author)) {
    const auto id = snap.corpus().paper(i).id;
    const auto* row = model.distribution(id);
    if (!row) throw std::invalid_argument("paper " + std::to_string(id) + " is not in the topic model");
    rows.push_back(*row);
    cites.push_back(static_cast<double>(snap.paper_citations(i)));
  }
  if (rows.empty()) return {0.0, 0.0};
  return {diversity(rows), authority(rows, cites, model.topics)};
}

std::array<double, 4> temporal_features(const Corpus& corpus, AuthorId author, int t) {
  return temporal_from(CorpusSnapshot(corpus, t), CorpusSnapshot(corpus, t - 1), CorpusSnapshot(corpus, t - 2), author);
}

FeatureMatrix extract_features(const FeatureInputs& in, std::span<const AuthorId> authors) {
  const auto& snap = *in.snap;
  const CorpusSnapshot s1(*in.corpus, in.t - 1);
  const CorpusSnapshot s2(*in.corpus, in.t - 2);
  const auto coauthors = coauthor_index(*in.acn);
  const auto venue_cit = venue_citations(snap);

  FeatureMatrix m;
  m.authors.assign(authors.begin(), authors.end());
  std::sort(m.authors.begin(), m.authors.end());
  m.authors.erase(std::unique(m.authors.begin(), m.authors.end()), m.authors.end());
  m.rows.reserve(m.authors.size());
  for (AuthorId a : m.authors) {
    FeatureRow row{};
    auto put = [&](std::size_t offset, const auto& values) {
      std::copy(values.begin(), values.end(), row.begin() + static_cast<std::ptrdiff_t>(offset));
    };
    put(0, author_features(snap, a));
    put(3, social_features(snap, coauthors, *in.pr_acn, *in.pr_accn, a));
    put(9, venue_features(snap, venue_cit, *in.pr_vccn, a, in.t));
    put(12, content_features(snap, *in.topics, a));
    put(14, temporal_from(snap, s1, s2, a));
    m.rows.push_back(row);
  }
  return m;
}

FeatureMatrix log_transform(const FeatureMatrix& m) {
  if (m.transformed) throw std::logic_error("feature matrix is already log-transformed");
  FeatureMatrix out = m;
  for (auto& row : out.rows) {
    for (double& v : row) v = std::log1p(v);
  }
  out.transformed = true;
  return out;
}

std::string to_csv(const FeatureMatrix& m) {
  std::string out = "author_id";
  for (std::size_t k = 0; k < kFeatureCount; ++k) out += "," + feature_name(k);
  out += ",transformed\n";
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    out += std::to_string(m.authors[i]);
    for (double v : m.rows[i]) out += "," + format_g6(v);
    out += m.transformed ? ",1\n" : ",0\n";
  }
  return out;
}

FeatureMatrix feature_matrix_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("author_id,F1,", 0) != 0) throw std::runtime_error("bad feature CSV header");
  FeatureMatrix m;
  std::size_t line_no = 1;
  std::optional<bool> transformed;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != kFeatureCount + 2) throw std::runtime_error(fmt::format("feature CSV line {}: expected {} cells", line_no, kFeatureCount + 2));
    m.authors.push_back(std::stoll(cells[0]));
    FeatureRow row{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) row[k] = std::stod(cells[k + 1]);
    m.rows.push_back(row);
    const bool t = cells.back() == "1";
    if (transformed && *transformed != t) throw std::runtime_error("feature CSV mixes transformed and raw rows");
    transformed = t;
  }
  m.transformed = transformed.value_or(false);
  if (!std::is_sorted(m.authors.begin(), m.authors.end())) throw std::runtime_error("feature CSV rows must be sorted by author id");
  return m;
}

} // namespace ars
