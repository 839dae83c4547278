#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "are/domain.hpp"
#include "are/providers.hpp"

namespace are::retrieval {

/// u.v / (|u||v|). Throws DimMismatch or ZeroVector.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Scores every non-empty candidate snippet against the fact by embedding
/// cosine and returns them best first; equal scores keep search order.
/// Throws EmptyCandidates when no snippet is usable.
std::vector<EvidenceItem> rerank(const AtomicFact& fact, const std::vector<SearchResult>& candidates,
                                 EmbeddingProvider& embedder, const std::string& query_used);

/// Query -> search results memo, optionally persisted as JSONL lines of
/// {query, results, fetched_at}. Later lines for the same key win.
class SearchCache {
 public:
  SearchCache() = default;
  explicit SearchCache(std::filesystem::path file);

  std::optional<std::vector<SearchResult>> get(const std::string& query) const;
  void put(const std::string& query, const std::vector<SearchResult>& results);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<SearchResult>> entries_;
  std::optional<std::filesystem::path> file_;
};

class Retriever {
 public:
  Retriever(SearchProvider& search, EmbeddingProvider& embedder, int k = 5, SearchCache* cache = nullptr)
      : search_(search), embedder_(embedder), k_(k), cache_(cache) {}

  /// Top-1 reranked evidence for the fact. The query is the fact text
  /// verbatim unless an override (from fact expansion) is given. Every call
  /// counts as one retrieval on `counters`. Throws NoEvidence when the search
  /// returns nothing usable.
  EvidenceItem retrieve_evidence(const AtomicFact& fact, const std::optional<std::string>& query_override,
                                 CounterSink* counters) const;

  int k() const { return k_; }

 private:
  std::vector<SearchResult> fetch(const std::string& query) const;

  SearchProvider& search_;
  EmbeddingProvider& embedder_;
  int k_;
  SearchCache* cache_;
};

}  // namespace are::retrieval
