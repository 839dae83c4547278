#pragma once

#include <filesystem>
#include <optional>
#include <string>

// Run configuration, read from a key=value text file. Secrets never live in
// the file; they come from the environment (see Secrets).
namespace are {

struct Config {
  std::string chat_endpoint = "https://api.openai.com/v1/chat/completions";
  std::string chat_model = "gpt-3.5-turbo";
  int chat_max_tokens = 512;
  double chat_temperature = 0.0;
  double chat_rate_per_s = 0.0;

  std::string search_endpoint = "https://customsearch.googleapis.com/customsearch/v1";
  int search_k = 5;
  double search_rate_per_s = 0.0;

  std::string nli_endpoint;
  std::string embed_endpoint;
  std::string kg_endpoint = "https://www.wikidata.org/w/api.php";

  int max_iterations = 4;
  bool allow_edit = true;
  bool allow_reretrieval = true;

  int question_parallelism = 4;
  int fact_parallelism = 4;

  std::string cache_path;
  std::string mock_dir;  ///< Fixture suite; when set no live provider is built.

  double http_timeout_s = 30.0;
  int http_retries = 2;
  int http_backoff_ms = 500;

  unsigned long long seed = 7;

  /// Parses the key=value format. '#' starts a comment line. Unknown keys,
  /// malformed values and secret-looking keys throw ConfigError.
  static Config parse(const std::string& content);
  static Config load(const std::filesystem::path& path);

  /// Applies one key=value setting (same keys as the file).
  void set(const std::string& key, const std::string& value);
};

/// Credentials and endpoints read from the environment.
struct Secrets {
  std::string llm_api_key;     ///< ARE_LLM_API_KEY
  std::string search_api_key;  ///< ARE_SEARCH_API_KEY
  std::string search_cx;       ///< ARE_SEARCH_CX
  std::string nli_endpoint;    ///< ARE_NLI_ENDPOINT (overrides nli.endpoint)
  std::string embed_endpoint;  ///< ARE_EMBED_ENDPOINT (overrides embed.endpoint)

  static Secrets from_env();
};

}  // namespace are
