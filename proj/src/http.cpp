#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "are/http.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are::http {

namespace {

httplib::Headers to_httplib(const Headers& h) {
  httplib::Headers out;
  for (const auto& [k, v] : h) out.emplace(k, v);
  return out;
}

class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(double timeout_s) : timeout_s_(timeout_s) {}

  Response get(const std::string& url, const Params& params, const Headers& headers) override {
    const auto u = split_url(url);
    auto cli = client(u);
    httplib::Params p;
    for (const auto& [k, v] : params) p.emplace(k, v);
    return wrap(cli.Get(u.path, p, to_httplib(headers)), url);
  }

  Response post(const std::string& url, const std::string& json_body, const Headers& headers) override {
    const auto u = split_url(url);
    auto cli = client(u);
    return wrap(cli.Post(u.path, to_httplib(headers), json_body, "application/json"), url);
  }

 private:
  httplib::Client client(const Url& u) const {
    httplib::Client cli(u.origin);
    const auto secs = static_cast<time_t>(timeout_s_);
    const auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    cli.set_follow_location(true);
    return cli;
  }

  static Response wrap(const httplib::Result& res, const std::string& url) {
    if (!res) throw TransportError("request to " + url + " failed: " + httplib::to_string(res.error()));
    return Response{res->status, res->body};
  }

  double timeout_s_;
};

void default_sleep(int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); }

}  // namespace

std::shared_ptr<Transport> make_transport(double timeout_s) { return std::make_shared<HttplibTransport>(timeout_s); }

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("not a URL: \"" + url + "\"");
  const auto scheme = text::casefold(url.substr(0, scheme_end));
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported URL scheme in \"" + url + "\"");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return Url{url, "/"};
  return Url{url.substr(0, path_start), url.substr(path_start)};
}

void throw_for_status(const Response& r, const std::string& what) {
  const auto snippet = r.body.substr(0, 200);
  const auto msg = what + ": HTTP " + std::to_string(r.status) + " " + snippet;
  if (r.status == 429) throw QuotaError(msg);
  if (r.status == 403) {
    const auto b = text::casefold(r.body);
    if (b.find("quota") != std::string::npos || b.find("ratelimit") != std::string::npos) throw QuotaError(msg);
  }
  if (r.status == 408 || r.status >= 500) throw TransportError(msg);
  throw ProviderError(msg);
}

Json request_json(const std::function<Response()>& call, const RetryPolicy& policy, const std::string& what) {
  int delay = policy.backoff_ms;
  for (int attempt = 0;; ++attempt) {
    try {
      const auto r = call();
      if (r.status < 200 || r.status >= 300) throw_for_status(r, what);
      try {
        return Json::parse(r.body);
      } catch (const nlohmann::json::parse_error& e) {
        throw ProviderError(what + ": response is not JSON: " + e.what());
      }
    } catch (const TransportError&) {
      if (attempt >= policy.retries) throw;
      (policy.sleep_ms ? policy.sleep_ms : default_sleep)(delay);
      delay *= 2;
    }
  }
}

LiveChat::LiveChat(std::shared_ptr<Transport> t, std::string endpoint, std::string model, std::string api_key,
                   RetryPolicy policy, double rate_per_s)
    : t_(std::move(t)),
      endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      policy_(std::move(policy)),
      bucket_(rate_per_s, std::max(1.0, rate_per_s)) {}

Json LiveChat::request_body(const std::string& model, const ChatRequest& req) {
  Json messages = Json::array();
  if (!req.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", req.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", req.user_prompt}});
  return Json{{"model", model},
              {"messages", messages},
              {"max_tokens", req.max_output_tokens},
              {"temperature", req.temperature}};
}

ChatResponse LiveChat::chat(const ChatRequest& req) {
  if (req.max_output_tokens <= 0) throw PreconditionError("max_output_tokens must be positive");
  bucket_.acquire();
  const auto body = request_body(model_, req).dump();
  const Headers headers{{"Authorization", "Bearer " + api_key_}};
  const auto j = request_json([&] { return t_->post(endpoint_, body, headers); }, policy_, "chat");
  ChatResponse out;
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : std::string();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("chat: unexpected response shape: ") + e.what());
  }
  if (const auto u = j.find("usage"); u != j.end() && u->is_object()) {
    out.tokens_in = u->value("prompt_tokens", 0LL);
    out.tokens_out = u->value("completion_tokens", 0LL);
  }
  return out;
}

LiveSearch::LiveSearch(std::shared_ptr<Transport> t, std::string endpoint, std::string api_key, std::string cx,
                       RetryPolicy policy, double rate_per_s)
    : t_(std::move(t)),
      endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      cx_(std::move(cx)),
      policy_(std::move(policy)),
      bucket_(rate_per_s, std::max(1.0, rate_per_s)) {}

std::vector<SearchResult> LiveSearch::search(const std::string& query, int k) {
  if (text::trim(query).empty()) throw EmptyQuery();
  if (k <= 0) return {};
  bucket_.acquire();
  // The custom search API caps num at 10.
  const Params params{{"key", api_key_}, {"cx", cx_}, {"q", query}, {"num", std::to_string(std::min(k, 10))}};
  const auto j = request_json([&] { return t_->get(endpoint_, params, {}); }, policy_, "search");
  std::vector<SearchResult> out;
  if (const auto items = j.find("items"); items != j.end() && items->is_array()) {
    for (const auto& item : *items) {
      if (static_cast<int>(out.size()) >= k) break;
      out.push_back(SearchResult{item.value("title", ""), item.value("snippet", ""), item.value("link", "")});
    }
  }
  return out;
}

LiveEmbedder::LiveEmbedder(std::shared_ptr<Transport> t, std::string endpoint, RetryPolicy policy)
    : t_(std::move(t)), endpoint_(std::move(endpoint)), policy_(std::move(policy)) {}

std::vector<EmbeddingVector> LiveEmbedder::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw PreconditionError("embed: no texts");
  const auto body = Json{{"inputs", texts}}.dump();
  const auto j = request_json([&] { return t_->post(endpoint_, body, {}); }, policy_, "embed");
  std::vector<EmbeddingVector> out;
  try {
    for (const auto& v : j.at("embeddings")) out.push_back(EmbeddingVector{v.get<std::vector<double>>()});
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("embed: unexpected response shape: ") + e.what());
  }
  if (out.size() != texts.size()) throw ProviderError("embed: got " + std::to_string(out.size()) + " vectors");
  for (const auto& v : out) {
    if (v.dim() == 0 || v.dim() != out.front().dim()) throw ProviderError("embed: inconsistent dimensions");
    for (double x : v.values) {
      if (!std::isfinite(x)) throw ProviderError("embed: non-finite value");
    }
  }
  return out;
}

LiveNli::LiveNli(std::shared_ptr<Transport> t, std::string endpoint, RetryPolicy policy)
    : t_(std::move(t)), endpoint_(std::move(endpoint)), policy_(std::move(policy)) {}

NliVerdict LiveNli::nli(const std::string& premise, const std::string& hypothesis) {
  if (text::trim(premise).empty() || text::trim(hypothesis).empty()) {
    throw PreconditionError("nli: premise and hypothesis must be non-empty");
  }
  const auto body = Json{{"premise", premise},
                         {"hypothesis", hypothesis},
                         {"input", "premise: " + premise + " hypothesis: " + hypothesis}}
                        .dump();
  const auto j = request_json([&] { return t_->post(endpoint_, body, {}); }, policy_, "nli");
  NliVerdict v;
  try {
    v.entail_prob = std::clamp(j.at("entail_prob").get<double>(), 0.0, 1.0);
    const auto& label = j.at("label");
    v.binary_entail = label.is_boolean() ? label.get<bool>()
                      : label.is_number() ? label.get<double>() != 0.0
                                          : text::casefold(label.get<std::string>()) == "entailment" ||
                                                label.get<std::string>() == "1";
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("nli: unexpected response shape: ") + e.what());
  }
  return v;
}

ProviderBundle make_live_bundle(const Config& cfg, const Secrets& secrets, std::shared_ptr<Transport> transport) {
  if (!transport) transport = make_transport(cfg.http_timeout_s);
  const RetryPolicy policy{cfg.http_retries, cfg.http_backoff_ms, {}};
  const auto nli_endpoint = secrets.nli_endpoint.empty() ? cfg.nli_endpoint : secrets.nli_endpoint;
  const auto embed_endpoint = secrets.embed_endpoint.empty() ? cfg.embed_endpoint : secrets.embed_endpoint;
  if (secrets.llm_api_key.empty()) throw ConfigError("ARE_LLM_API_KEY is not set");
  if (secrets.search_api_key.empty() || secrets.search_cx.empty()) {
    throw ConfigError("ARE_SEARCH_API_KEY and ARE_SEARCH_CX must be set");
  }
  if (nli_endpoint.empty()) throw ConfigError("no NLI endpoint (nli.endpoint or ARE_NLI_ENDPOINT)");
  if (embed_endpoint.empty()) throw ConfigError("no embedding endpoint (embed.endpoint or ARE_EMBED_ENDPOINT)");
  for (const auto* u : {&cfg.chat_endpoint, &cfg.search_endpoint, &nli_endpoint, &embed_endpoint}) split_url(*u);

  ProviderBundle b;
  b.chat = std::make_shared<LiveChat>(transport, cfg.chat_endpoint, cfg.chat_model, secrets.llm_api_key, policy,
                                      cfg.chat_rate_per_s);
  b.search = std::make_shared<LiveSearch>(transport, cfg.search_endpoint, secrets.search_api_key, secrets.search_cx,
                                          policy, cfg.search_rate_per_s);
  b.embed = std::make_shared<LiveEmbedder>(transport, embed_endpoint, policy);
  b.nli = std::make_shared<LiveNli>(transport, nli_endpoint, policy);
  return b;
}

}  // namespace are::http
