#include "are/mock_providers.hpp"

#include <algorithm>
#include <set>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are {

long long mock_token_count(std::string_view s) {
  return static_cast<long long>(text::split_words(s).size());
}

namespace {

ChatResponse make_response(const ChatRequest& req, std::string text) {
  ChatResponse r;
  r.tokens_in = mock_token_count(req.system_prompt) + mock_token_count(req.user_prompt);
  r.tokens_out = mock_token_count(text);
  r.text = std::move(text);
  return r;
}

std::string nli_key(std::string_view s) { return text::normalize_ws(s); }

}  // namespace

void to_json(Json& j, const ChatTranscriptEntry& v) {
  j = Json{{"key", v.key}, {"response", v.response}};
  if (!v.task.empty()) {
    j["task"] = v.task;
    j["vars"] = v.vars;
  }
}

void from_json(const Json& j, ChatTranscriptEntry& v) {
  v.key = j.value("key", std::string{});
  v.response = j.at("response").get<std::string>();
  v.task = j.value("task", std::string{});
  v.vars = j.value("vars", Json::object());
}

FixtureChat::FixtureChat(std::vector<ChatTranscriptEntry> entries) {
  for (auto& e : entries) table_.insert_or_assign(e.key, std::move(e.response));
}

ChatResponse FixtureChat::chat(const ChatRequest& req) {
  const auto key = chat_key(req);
  const auto it = table_.find(key);
  if (it == table_.end()) {
    const std::string label = req.task.empty() ? std::string("chat") : req.task;
    throw FixtureMiss(label + " prompt key " + key);
  }
  return make_response(req, it->second);
}

ScriptedChat::ScriptedChat(std::vector<std::string> responses)
    : script_(responses.begin(), responses.end()) {}

ChatResponse ScriptedChat::chat(const ChatRequest& req) {
  std::lock_guard lock(mu_);
  seen_.push_back(req);
  if (script_.empty()) throw FixtureMiss("scripted chat exhausted at request " + std::to_string(seen_.size()));
  auto text = std::move(script_.front());
  script_.pop_front();
  return make_response(req, std::move(text));
}

std::vector<ChatRequest> ScriptedChat::requests() const {
  std::lock_guard lock(mu_);
  return seen_;
}

std::size_t ScriptedChat::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size();
}

ChatResponse FunctionChat::chat(const ChatRequest& req) { return make_response(req, fn_(req)); }

ChatResponse RecordingChat::chat(const ChatRequest& req) {
  auto resp = inner_->chat(req);
  const auto key = chat_key(req);
  std::lock_guard lock(mu_);
  if (!index_.contains(key)) {
    index_.emplace(key, entries_.size());
    entries_.push_back({key, resp.text, req.task, req.vars});
  }
  return resp;
}

std::vector<ChatTranscriptEntry> RecordingChat::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

void to_json(Json& j, const SearchFixtureEntry& v) { j = Json{{"query", v.query}, {"results", v.results}}; }

void from_json(const Json& j, SearchFixtureEntry& v) {
  v.query = j.at("query").get<std::string>();
  v.results = j.at("results").get<std::vector<SearchResult>>();
}

FixtureSearch::FixtureSearch(std::vector<SearchFixtureEntry> entries) {
  for (auto& e : entries) table_.insert_or_assign(normalize_query(e.query), std::move(e.results));
}

std::vector<SearchResult> FixtureSearch::search(const std::string& query, int k) {
  if (text::trim(query).empty()) throw EmptyQuery();
  const auto it = table_.find(normalize_query(query));
  if (it == table_.end() || k <= 0) return {};
  const auto n = std::min<std::size_t>(it->second.size(), static_cast<std::size_t>(k));
  return {it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<EmbeddingVector> TrigramEmbedder::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw PreconditionError("embed: no texts");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

EmbeddingVector TrigramEmbedder::embed_one(std::string_view input) const {
  EmbeddingVector v;
  v.values.assign(dim_, 0.0);
  const auto s = text::casefold(text::normalize_ws(input));
  if (s.empty()) return v;
  if (s.size() < 3) {
    v.values[text::fnv1a64(s) % dim_] += 1.0;
    return v;
  }
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
    v.values[text::fnv1a64(std::string_view(s).substr(i, 3)) % dim_] += 1.0;
  }
  return v;
}

FixtureEmbedder::FixtureEmbedder(std::map<std::string, std::vector<double>> table,
                                 std::optional<std::size_t> trigram_dim) {
  for (auto& [k, v] : table) table_.insert_or_assign(text::normalize_ws(k), std::move(v));
  if (trigram_dim) fallback_.emplace(*trigram_dim);
}

std::vector<EmbeddingVector> FixtureEmbedder::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw PreconditionError("embed: no texts");
  std::vector<EmbeddingVector> out;
  for (const auto& t : texts) {
    if (auto it = table_.find(text::normalize_ws(t)); it != table_.end()) {
      out.push_back({it->second});
    } else if (fallback_) {
      out.push_back(fallback_->embed_one(t));
    } else {
      throw FixtureMiss("embedding for \"" + t + "\"");
    }
  }
  const auto dim = out.front().dim();
  for (const auto& v : out) {
    if (v.dim() != dim) throw DimMismatch("fixture embeddings disagree on dimension");
  }
  return out;
}

NliVerdict OverlapNli::nli(const std::string& premise, const std::string& hypothesis) {
  if (text::trim(premise).empty() || text::trim(hypothesis).empty()) {
    throw PreconditionError("nli: premise and hypothesis must be non-empty");
  }
  const auto p = text::casefold(text::normalize_ws(premise));
  const auto h = text::casefold(text::normalize_ws(hypothesis));
  if (p.find(h) != std::string::npos) return {1.0, true};
  const auto hw = text::content_words(h);
  const auto pw = text::content_words(p);
  const std::set<std::string> hyp(hw.begin(), hw.end());
  const std::set<std::string> prem(pw.begin(), pw.end());
  if (hyp.empty()) return {0.0, false};
  std::size_t hit = 0;
  for (const auto& w : hyp) hit += prem.count(w);
  const double r = static_cast<double>(hit) / static_cast<double>(hyp.size());
  return {r, hit == hyp.size()};
}

FixtureNli::FixtureNli(std::vector<NliFixtureEntry> entries, bool overlap_fallback)
    : overlap_fallback_(overlap_fallback) {
  for (auto& e : entries) table_.insert_or_assign({nli_key(e.premise), nli_key(e.hypothesis)}, e.verdict);
}

NliVerdict FixtureNli::nli(const std::string& premise, const std::string& hypothesis) {
  if (auto it = table_.find({nli_key(premise), nli_key(hypothesis)}); it != table_.end()) return it->second;
  if (overlap_fallback_) return overlap_.nli(premise, hypothesis);
  throw FixtureMiss("nli verdict for hypothesis \"" + hypothesis + "\"");
}

}  // namespace are
