#include "are/providers.hpp"

#include <algorithm>
#include <thread>

#include "are/text.hpp"

namespace are {

void to_json(Json& j, const SearchResult& v) {
  j = Json{{"title", v.title}, {"snippet", v.snippet}, {"url", v.url}};
}

void from_json(const Json& j, SearchResult& v) {
  v.title = j.value("title", std::string{});
  v.snippet = j.value("snippet", std::string{});
  v.url = j.contains("url") ? j.at("url").get<std::string>() : j.value("link", std::string{});
}

std::string chat_key(const ChatRequest& req) {
  const auto payload = text::normalize_ws(req.system_prompt) + "\n" + text::normalize_ws(req.user_prompt);
  return text::hex64(text::fnv1a64(payload));
}

std::string normalize_query(std::string_view q) { return text::casefold(text::normalize_ws(q)); }

double SteadyClock::now_seconds() const {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void CounterSink::add_chat(const ChatResponse& r) {
  interactions_.fetch_add(1, std::memory_order_relaxed);
  tokens_.fetch_add(std::max(0LL, r.tokens_in) + std::max(0LL, r.tokens_out), std::memory_order_relaxed);
}

RunCounters CounterSink::snapshot() const {
  RunCounters c;
  c.llm_interactions = interactions_.load();
  c.tokens_consumed = tokens_.load();
  c.retrieval_calls = retrievals_.load();
  return c;
}

TokenBucket::TokenBucket(double rate_per_s, double burst)
    : rate_(rate_per_s), burst_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rate_;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    lock.lock();
  }
}

}  // namespace are
