#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "are/providers.hpp"

// Deterministic providers for tests and offline runs. Every mock here is a
// pure function of its inputs and fixture tables.
namespace are {

/// Approximate token count used by mocks: whitespace-separated words.
long long mock_token_count(std::string_view s);

/// One recorded chat exchange. `task`/`vars` are optional provenance that
/// lets the fixture tooling re-derive `key` from the current templates.
struct ChatTranscriptEntry {
  std::string key;
  std::string response;
  std::string task;
  Json vars = Json::object();
};

void to_json(Json& j, const ChatTranscriptEntry& v);
void from_json(const Json& j, ChatTranscriptEntry& v);

/// Replays a fixture table keyed by chat_key(). Unknown keys throw FixtureMiss.
class FixtureChat final : public ChatProvider {
 public:
  explicit FixtureChat(std::vector<ChatTranscriptEntry> entries);
  ChatResponse chat(const ChatRequest& req) override;
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::string> table_;
};

/// Returns responses in order, regardless of the prompt. Running past the end
/// of the script throws FixtureMiss. `requests()` exposes what was asked.
class ScriptedChat final : public ChatProvider {
 public:
  explicit ScriptedChat(std::vector<std::string> responses);
  ChatResponse chat(const ChatRequest& req) override;
  std::vector<ChatRequest> requests() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> script_;
  std::vector<ChatRequest> seen_;
};

/// Answers through a callback. Handy for rule-based authoring and tests that
/// need to react to the prompt.
class FunctionChat final : public ChatProvider {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit FunctionChat(Fn fn) : fn_(std::move(fn)) {}
  ChatResponse chat(const ChatRequest& req) override;

 private:
  Fn fn_;
};

/// Forwards to an inner provider and keeps every exchange as a transcript
/// entry, de-duplicated by key, in first-seen order.
class RecordingChat final : public ChatProvider {
 public:
  explicit RecordingChat(std::shared_ptr<ChatProvider> inner) : inner_(std::move(inner)) {}
  ChatResponse chat(const ChatRequest& req) override;
  std::vector<ChatTranscriptEntry> entries() const;

 private:
  std::shared_ptr<ChatProvider> inner_;
  mutable std::mutex mu_;
  std::vector<ChatTranscriptEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

struct SearchFixtureEntry {
  std::string query;
  std::vector<SearchResult> results;
};

void to_json(Json& j, const SearchFixtureEntry& v);
void from_json(const Json& j, SearchFixtureEntry& v);

/// Search keyed by normalize_query(); unknown queries return no results.
class FixtureSearch final : public SearchProvider {
 public:
  explicit FixtureSearch(std::vector<SearchFixtureEntry> entries);
  std::vector<SearchResult> search(const std::string& query, int k) override;

 private:
  std::map<std::string, std::vector<SearchResult>> table_;
};

/// Character-trigram hashed counts (FNV-1a mod dim) over the case-folded,
/// whitespace-normalized text. Texts shorter than three bytes hash whole.
class TrigramEmbedder final : public EmbeddingProvider {
 public:
  explicit TrigramEmbedder(std::size_t dim = 64) : dim_(dim) {}
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
  EmbeddingVector embed_one(std::string_view text) const;

 private:
  std::size_t dim_;
};

/// Explicit text -> vector table, optionally falling back to trigram hashing.
class FixtureEmbedder final : public EmbeddingProvider {
 public:
  FixtureEmbedder(std::map<std::string, std::vector<double>> table, std::optional<std::size_t> trigram_dim);
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  std::map<std::string, std::vector<double>> table_;
  std::optional<TrigramEmbedder> fallback_;
};

/// Lexical-overlap entailment:
///  - hypothesis is a substring of premise after case-folding -> (1, true)
///  - otherwise r = |distinct hypothesis words found in premise| / |distinct
///    hypothesis words| -> (r, r == 1)
/// Words come from text::content_words().
class OverlapNli final : public NliProvider {
 public:
  NliVerdict nli(const std::string& premise, const std::string& hypothesis) override;
};

struct NliFixtureEntry {
  std::string premise;
  std::string hypothesis;
  NliVerdict verdict;
};

/// Explicit (premise, hypothesis) table with an optional overlap fallback.
/// Without the fallback an unknown pair throws FixtureMiss.
class FixtureNli final : public NliProvider {
 public:
  FixtureNli(std::vector<NliFixtureEntry> entries, bool overlap_fallback);
  NliVerdict nli(const std::string& premise, const std::string& hypothesis) override;

 private:
  std::map<std::pair<std::string, std::string>, NliVerdict> table_;
  bool overlap_fallback_;
  OverlapNli overlap_;
};

}  // namespace are
