#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "are/config.hpp"
#include "are/providers.hpp"

// Live provider adapters over HTTP(S). The transport is an interface so the
// request shapes and retry policy can be exercised without a network.
namespace are::http {

using Params = std::vector<std::pair<std::string, std::string>>;
using Headers = std::vector<std::pair<std::string, std::string>>;

struct Response {
  int status = 0;
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws TransportError when no response arrives (DNS, connect, timeout).
  virtual Response get(const std::string& url, const Params& params, const Headers& headers) = 0;
  virtual Response post(const std::string& url, const std::string& json_body, const Headers& headers) = 0;
};

/// cpp-httplib backed transport; https needs OpenSSL.
std::shared_ptr<Transport> make_transport(double timeout_s);

struct Url {
  std::string origin;  ///< scheme://host[:port]
  std::string path;    ///< starts with '/'
};

/// Throws ConfigError for anything that is not an http(s) URL.
Url split_url(const std::string& url);

struct RetryPolicy {
  int retries = 2;
  int backoff_ms = 500;  ///< Doubles after every failed attempt.
  std::function<void(int)> sleep_ms;  ///< Injected in tests; defaults to a real sleep.
};

/// Maps a non-2xx status to the library's error types: 429 and quota-flavoured
/// 403s are QuotaError, 408 and 5xx TransportError, everything else
/// ProviderError.
[[noreturn]] void throw_for_status(const Response& r, const std::string& what);

/// Runs `call` and parses its 2xx body as JSON, retrying TransportError only.
Json request_json(const std::function<Response()>& call, const RetryPolicy& policy, const std::string& what);

class LiveChat final : public ChatProvider {
 public:
  LiveChat(std::shared_ptr<Transport> t, std::string endpoint, std::string model, std::string api_key,
           RetryPolicy policy, double rate_per_s = 0.0);
  ChatResponse chat(const ChatRequest& req) override;

  /// {model, messages:[{role, content}], max_tokens, temperature}
  static Json request_body(const std::string& model, const ChatRequest& req);

 private:
  std::shared_ptr<Transport> t_;
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
  RetryPolicy policy_;
  TokenBucket bucket_;
};

/// Custom-search style GET with key, cx, q, num; reads items[].title/snippet/link.
class LiveSearch final : public SearchProvider {
 public:
  LiveSearch(std::shared_ptr<Transport> t, std::string endpoint, std::string api_key, std::string cx,
             RetryPolicy policy, double rate_per_s = 0.0);
  std::vector<SearchResult> search(const std::string& query, int k) override;

 private:
  std::shared_ptr<Transport> t_;
  std::string endpoint_;
  std::string api_key_;
  std::string cx_;
  RetryPolicy policy_;
  TokenBucket bucket_;
};

/// POST {inputs:[...]} -> {embeddings:[[...], ...]}.
class LiveEmbedder final : public EmbeddingProvider {
 public:
  LiveEmbedder(std::shared_ptr<Transport> t, std::string endpoint, RetryPolicy policy);
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  std::shared_ptr<Transport> t_;
  std::string endpoint_;
  RetryPolicy policy_;
};

/// POST {premise, hypothesis, input: "premise: {e} hypothesis: {s}"} ->
/// {entail_prob, label}.
class LiveNli final : public NliProvider {
 public:
  LiveNli(std::shared_ptr<Transport> t, std::string endpoint, RetryPolicy policy);
  NliVerdict nli(const std::string& premise, const std::string& hypothesis) override;

 private:
  std::shared_ptr<Transport> t_;
  std::string endpoint_;
  RetryPolicy policy_;
};

/// Live providers from config and environment. Missing credentials or
/// endpoints throw ConfigError.
ProviderBundle make_live_bundle(const Config& cfg, const Secrets& secrets,
                                std::shared_ptr<Transport> transport = nullptr);

}  // namespace are::http
