#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "are/mock_providers.hpp"

// Fixture suites: a directory of recorded provider transcripts that replays
// a pipeline run without any network access.
//
// Layout:
//   chat.jsonl       {key, response, task?, vars?}
//   search.jsonl     {query, results:[{title, snippet, url}]}
//   embed.jsonl      {"mode":"trigram","dim":N} and/or {text, vector:[...]}
//   nli.jsonl        {"mode":"overlap"} and/or {premise, hypothesis, entail_prob, binary_entail}
//   kg.tsv           subject, property, object, property_id
//   questions.jsonl  {id, question, dataset_tag?}
//   manifest.json    {name, version, files:[...]}   (optional)
namespace are::fixtures {

inline constexpr std::array<const char*, 6> kSuiteFiles = {"chat.jsonl", "search.jsonl", "embed.jsonl",
                                                           "nli.jsonl",  "kg.tsv",       "questions.jsonl"};

struct FixtureSuite {
  std::filesystem::path dir;
  Json manifest;  ///< null when the suite has no manifest.json
  std::shared_ptr<FixtureChat> chat;
  std::shared_ptr<FixtureSearch> search;
  std::shared_ptr<EmbeddingProvider> embed;
  std::shared_ptr<NliProvider> nli;
  std::vector<Question> questions;

  /// Providers with a frozen clock, so run records are byte-identical.
  ProviderBundle bundle() const;
  /// Files the suite ships, manifest included.
  std::vector<std::string> files() const;
};

/// Throws InputError when a listed file is missing or malformed.
FixtureSuite load_fixture_suite(const std::filesystem::path& dir);

std::vector<Json> read_jsonl(const std::filesystem::path& file);
void write_jsonl(const std::filesystem::path& file, const std::vector<Json>& lines);

std::vector<Question> parse_questions(const std::string& content);
std::vector<Question> load_questions(const std::filesystem::path& file);

std::shared_ptr<EmbeddingProvider> load_embedder(const std::filesystem::path& file);
std::shared_ptr<NliProvider> load_nli(const std::filesystem::path& file);

struct RekeyReport {
  std::size_t total = 0;
  std::size_t changed = 0;
  std::size_t without_provenance = 0;  ///< Entries lacking task/vars keep their key.
};

/// Recomputes every chat key from its recorded task and vars with the current
/// templates and rewrites the file in place.
RekeyReport rekey_chat(const std::filesystem::path& chat_file);

/// Lists problems: missing files, unreadable lines, and chat entries whose
/// key no longer matches their recorded prompt. Empty means healthy.
std::vector<std::string> check_suite(const std::filesystem::path& dir);

}  // namespace are::fixtures
