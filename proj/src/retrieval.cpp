#include "are/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are::retrieval {

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw DimMismatch("cosine: dimensions " + std::to_string(u.dim()) + " and " + std::to_string(v.dim()));
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0) throw ZeroVector();
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<EvidenceItem> rerank(const AtomicFact& fact, const std::vector<SearchResult>& candidates,
                                 EmbeddingProvider& embedder, const std::string& query_used) {
  std::vector<const SearchResult*> usable;
  for (const auto& c : candidates) {
    if (!text::trim(c.snippet).empty()) usable.push_back(&c);
  }
  if (usable.empty()) throw EmptyCandidates();

  std::vector<std::string> texts{fact.text};
  for (const auto* c : usable) texts.push_back(c->snippet);
  const auto vectors = embedder.embed(texts);
  if (vectors.size() != texts.size()) throw ProviderError("embedder returned the wrong number of vectors");

  std::vector<EvidenceItem> items;
  items.reserve(usable.size());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    double score = 0.0;
    try {
      score = cosine_similarity(vectors[0], vectors[i + 1]);
    } catch (const ZeroVector&) {
      score = 0.0;
    }
    items.push_back({usable[i]->snippet, usable[i]->url, score, query_used});
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const EvidenceItem& a, const EvidenceItem& b) { return a.rank_score > b.rank_score; });
  return items;
}

SearchCache::SearchCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(*file_);
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      const auto j = Json::parse(line);
      entries_.insert_or_assign(normalize_query(j.at("query").get<std::string>()),
                                j.at("results").get<std::vector<SearchResult>>());
    } catch (const std::exception&) {
      // A torn trailing line from an interrupted run; later puts rewrite it.
    }
  }
}

std::optional<std::vector<SearchResult>> SearchCache::get(const std::string& query) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(normalize_query(query));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void SearchCache::put(const std::string& query, const std::vector<SearchResult>& results) {
  std::lock_guard lock(mu_);
  entries_.insert_or_assign(normalize_query(query), results);
  if (!file_) return;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  std::ofstream out(*file_, std::ios::app);
  out << Json{{"query", query}, {"results", results}, {"fetched_at", stamp}}.dump() << '\n';
}

std::size_t SearchCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::vector<SearchResult> Retriever::fetch(const std::string& query) const {
  if (cache_ != nullptr) {
    if (auto hit = cache_->get(query)) return *hit;
  }
  auto results = search_.search(query, k_);
  if (cache_ != nullptr) cache_->put(query, results);
  return results;
}

EvidenceItem Retriever::retrieve_evidence(const AtomicFact& fact, const std::optional<std::string>& query_override,
                                          CounterSink* counters) const {
  if (counters != nullptr) counters->add_retrieval();
  const std::string query = query_override ? *query_override : fact.text;
  const auto results = fetch(query);
  if (results.empty()) throw NoEvidence("no search results for \"" + query + "\"");
  try {
    return rerank(fact, results, embedder_, query).front();
  } catch (const EmptyCandidates&) {
    throw NoEvidence("only empty snippets for \"" + query + "\"");
  }
}

}  // namespace are::retrieval
