#include "are/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are {

namespace {

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got \"" + v + "\"");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got \"" + v + "\"");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto f = text::casefold(v);
  if (f == "true" || f == "1" || f == "yes" || f == "on") return true;
  if (f == "false" || f == "0" || f == "no" || f == "off") return false;
  throw ConfigError(key + ": expected a boolean, got \"" + v + "\"");
}

int positive(const std::string& key, int v) {
  if (v < 1) throw ConfigError(key + " must be at least 1");
  return v;
}

bool looks_secret(const std::string& key) {
  const auto k = text::casefold(key);
  for (const char* s : {"api_key", "apikey", "secret", "token", "password"}) {
    if (k.find(s) != std::string::npos) return true;
  }
  const auto dot = k.rfind('.');
  const auto leaf = dot == std::string::npos ? k : k.substr(dot + 1);
  return leaf == "key" || leaf == "cx";
}

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string() : std::string(v);
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  if (looks_secret(key)) {
    throw ConfigError("\"" + key + "\" looks like a secret; set it through the environment instead");
  }
  using Setter = std::function<void(Config&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"chat.endpoint", [](Config& c, const std::string& v) { c.chat_endpoint = v; }},
      {"chat.model", [](Config& c, const std::string& v) { c.chat_model = v; }},
      {"chat.max_tokens",
       [](Config& c, const std::string& v) { c.chat_max_tokens = positive("chat.max_tokens", to_int("chat.max_tokens", v)); }},
      {"chat.temperature",
       [](Config& c, const std::string& v) {
         c.chat_temperature = to_double("chat.temperature", v);
         if (c.chat_temperature < 0) throw ConfigError("chat.temperature must be >= 0");
       }},
      {"chat.rate_per_s", [](Config& c, const std::string& v) { c.chat_rate_per_s = to_double("chat.rate_per_s", v); }},
      {"search.endpoint", [](Config& c, const std::string& v) { c.search_endpoint = v; }},
      {"search.k", [](Config& c, const std::string& v) { c.search_k = positive("search.k", to_int("search.k", v)); }},
      {"search.rate_per_s",
       [](Config& c, const std::string& v) { c.search_rate_per_s = to_double("search.rate_per_s", v); }},
      {"nli.endpoint", [](Config& c, const std::string& v) { c.nli_endpoint = v; }},
      {"embed.endpoint", [](Config& c, const std::string& v) { c.embed_endpoint = v; }},
      {"kg.endpoint", [](Config& c, const std::string& v) { c.kg_endpoint = v; }},
      {"loop.max_iterations",
       [](Config& c, const std::string& v) {
         c.max_iterations = positive("loop.max_iterations", to_int("loop.max_iterations", v));
       }},
      {"loop.allow_edit", [](Config& c, const std::string& v) { c.allow_edit = to_bool("loop.allow_edit", v); }},
      {"loop.allow_reretrieval",
       [](Config& c, const std::string& v) { c.allow_reretrieval = to_bool("loop.allow_reretrieval", v); }},
      {"parallelism.questions",
       [](Config& c, const std::string& v) {
         c.question_parallelism = positive("parallelism.questions", to_int("parallelism.questions", v));
       }},
      {"parallelism.facts",
       [](Config& c, const std::string& v) {
         c.fact_parallelism = positive("parallelism.facts", to_int("parallelism.facts", v));
       }},
      {"cache.path", [](Config& c, const std::string& v) { c.cache_path = v; }},
      {"mock.dir", [](Config& c, const std::string& v) { c.mock_dir = v; }},
      {"http.timeout_s", [](Config& c, const std::string& v) { c.http_timeout_s = to_double("http.timeout_s", v); }},
      {"http.retries",
       [](Config& c, const std::string& v) {
         c.http_retries = to_int("http.retries", v);
         if (c.http_retries < 0) throw ConfigError("http.retries must be >= 0");
       }},
      {"http.backoff_ms", [](Config& c, const std::string& v) { c.http_backoff_ms = to_int("http.backoff_ms", v); }},
      {"seed",
       [](Config& c, const std::string& v) {
         try {
           c.seed = std::stoull(v);
         } catch (const std::exception&) {
           throw ConfigError("seed: expected an unsigned integer, got \"" + v + "\"");
         }
       }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key \"" + key + "\"");
  it->second(*this, value);
}

Config Config::parse(const std::string& content) {
  Config c;
  std::istringstream in(content);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    const auto key = text::trim(t.substr(0, eq));
    const auto value = text::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(n) + ": empty key");
    try {
      c.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Secrets Secrets::from_env() {
  return Secrets{env("ARE_LLM_API_KEY"), env("ARE_SEARCH_API_KEY"), env("ARE_SEARCH_CX"), env("ARE_NLI_ENDPOINT"),
                 env("ARE_EMBED_ENDPOINT")};
}

}  // namespace are
