#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "are/domain.hpp"

// Adapter interfaces for the four external model services. Every
// implementation must tolerate concurrent calls.
namespace are {

struct ChatRequest {
  std::string system_prompt;
  std::string user_prompt;
  int max_output_tokens = 512;
  double temperature = 0.0;
  // Prompt provenance. Never sent over the wire and not part of the fixture key;
  // lets transcript tooling re-render a prompt from its template.
  std::string task;
  Json vars = Json::object();
};

struct ChatResponse {
  std::string text;
  long long tokens_in = 0;
  long long tokens_out = 0;
};

struct SearchResult {
  std::string title;
  std::string snippet;  ///< May be empty.
  std::string url;

  bool operator==(const SearchResult&) const = default;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

struct NliVerdict {
  double entail_prob = 0.0;
  bool binary_entail = false;  ///< The scorer's own discrete label.
};

void to_json(Json& j, const SearchResult& v);
void from_json(const Json& j, SearchResult& v);

/// Stable key for a chat request: FNV-1a over the whitespace-normalized prompts.
std::string chat_key(const ChatRequest& req);

/// Whitespace-normalized, case-folded search query; cache and fixture key.
std::string normalize_query(std::string_view q);

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse chat(const ChatRequest& req) = 0;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  /// At most k results, engine order. Throws EmptyQuery on a blank query.
  virtual std::vector<SearchResult> search(const std::string& query, int k) = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

class NliProvider {
 public:
  virtual ~NliProvider() = default;
  virtual NliVerdict nli(const std::string& premise, const std::string& hypothesis) = 0;
};

/// Time source for wall-clock counters. Fixture runs use a frozen clock so
/// run records stay byte-identical.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_seconds() const = 0;
};

class SteadyClock final : public Clock {
 public:
  double now_seconds() const override;
};

class FrozenClock final : public Clock {
 public:
  double now_seconds() const override { return 0.0; }
};

struct ProviderBundle {
  std::shared_ptr<ChatProvider> chat;
  std::shared_ptr<SearchProvider> search;
  std::shared_ptr<EmbeddingProvider> embed;
  std::shared_ptr<NliProvider> nli;
  std::shared_ptr<Clock> clock = std::make_shared<SteadyClock>();
};

/// Per-question run counters, safe to bump from concurrent fact workers.
class CounterSink {
 public:
  void add_chat(const ChatResponse& r);
  void add_retrieval() { retrievals_.fetch_add(1, std::memory_order_relaxed); }
  RunCounters snapshot() const;

 private:
  std::atomic<long long> interactions_{0};
  std::atomic<long long> tokens_{0};
  std::atomic<long long> retrievals_{0};
};

/// Token bucket limiter; `rate_per_s <= 0` disables limiting.
class TokenBucket {
 public:
  TokenBucket(double rate_per_s, double burst);
  void acquire();

 private:
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

}  // namespace are
