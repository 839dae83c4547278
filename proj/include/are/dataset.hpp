#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "are/domain.hpp"
#include "are/http.hpp"
#include "are/llm.hpp"

// Instruction-tuning data for the decomposition model, built from one-hop
// knowledge-graph triples: entity -> triples -> filter -> atomic facts ->
// generated text with its clause/fact alignment.
namespace are::dataset {

struct Triple {
  std::string subject;
  std::string property;
  std::string object;
  std::string property_id;

  bool operator==(const Triple&) const = default;
};

void to_json(Json& j, const Triple& v);
void from_json(const Json& j, Triple& v);

struct InstructionSample {
  std::string entity_id;
  std::string generated_text;  ///< S
  AnswerDecomposition alignment;
  std::vector<Triple> source_triples;
};

/// One JSONL line: {entity_id, "Generated content", output, source_triples}.
/// `output` uses the {"output":[{clause: [facts]}]} layout.
std::string sample_to_jsonl(const InstructionSample& s);
InstructionSample sample_from_jsonl(const std::string& line);

class KgClient {
 public:
  virtual ~KgClient() = default;
  /// Entity label plus its one-hop triples. Throws UnknownEntity.
  virtual std::vector<Triple> one_hop(const std::string& entity_id) = 0;
};

/// Reads a TSV of subject, property, object, property_id. The entity id of a
/// fixture entity is its subject label. A row with only a subject declares an
/// entity without triples.
class TsvKg final : public KgClient {
 public:
  static TsvKg load(const std::filesystem::path& path);
  static TsvKg parse(const std::string& content);
  std::vector<Triple> one_hop(const std::string& entity_id) override;
  std::vector<std::string> entities() const;

 private:
  std::map<std::string, std::vector<Triple>> by_subject_;
};

/// Wikidata API client: wbsearchentities resolves labels to ids,
/// wbgetentities fetches claims and the labels of the ids they mention.
class WikidataKg final : public KgClient {
 public:
  WikidataKg(std::shared_ptr<http::Transport> t, std::string endpoint, http::RetryPolicy policy,
             std::string language = "en");
  std::vector<Triple> one_hop(const std::string& entity_id) override;

 private:
  std::string resolve(const std::string& entity) const;
  std::map<std::string, std::string> labels(const std::vector<std::string>& ids) const;

  std::shared_ptr<http::Transport> t_;
  std::string endpoint_;
  http::RetryPolicy policy_;
  std::string lang_;
};

/// Triples of the entity; every returned triple has subject == the entity label.
std::vector<Triple> fetch_one_hop(const std::string& entity_id, KgClient& kg);

/// Heuristic deny rules for identifier, media and code triples.
struct FilterRules {
  std::set<std::string> denied_properties;     ///< Case-folded labels.
  std::set<std::string> denied_property_ids;   ///< e.g. "P236".
  std::vector<std::string> denied_property_words;  ///< Whole-word match in the label.
  std::vector<std::regex> denied_objects;
  bool deny_code_objects = true;

  static FilterRules defaults();
  bool denies(const Triple& t) const;
};

/// A whitespace-free token mixing digits with letters or separators, or a
/// long digit run. Years, plain numbers, decimals, dates and ordinals pass.
bool looks_like_code(std::string_view object);

std::vector<Triple> filter_triples(const std::vector<Triple>& ts, const FilterRules& rules);

/// Uniform integer in [0, n) by rejection sampling; stable across platforms
/// unlike std::uniform_int_distribution.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// Uniformly 3..8 triples (all of them when fewer are available), kept in
/// their original order.
std::vector<Triple> select_triples(const std::vector<Triple>& ts, std::mt19937_64& rng, int min_count = 3,
                                   int max_count = 8);

/// "The {property} of {subject} is {object}."
std::string template_fact(const Triple& t);

/// One atomic fact per triple via the chat model. Replies that are blank or
/// do not mention the subject fall back to template_fact().
std::vector<std::string> triples_to_facts(const std::vector<Triple>& ts, LlmClient& llm);

struct SampleOutcome {
  std::optional<InstructionSample> sample;  ///< Absent when rejected.
  std::vector<std::string> violations;
};

/// Checks coverage and traceability of an alignment against its inputs.
std::vector<std::string> sample_violations(const AnswerDecomposition& alignment, const std::vector<std::string>& facts,
                                           const std::vector<Triple>& triples);

/// Asks the model for S plus its alignment (one repair reprompt on malformed
/// JSON, then a one-fact-per-sentence fallback). Any violation rejects the
/// sample.
SampleOutcome facts_to_sample(const std::vector<std::string>& facts, const std::vector<Triple>& triples,
                              LlmClient& llm);

struct BuildOptions {
  double split_ratio = 0.8;
  std::uint64_t seed = 7;
  int parallelism = 4;
  FilterRules rules = FilterRules::defaults();
  std::optional<std::filesystem::path> out_dir;  ///< train.jsonl / eval.jsonl
};

struct BuildFailure {
  std::string entity_id;
  std::string reason;
};

struct DatasetSplit {
  std::vector<InstructionSample> train;
  std::vector<InstructionSample> eval;
  std::vector<BuildFailure> failures;
};

/// Builds one sample per entity. Each entity draws from its own generator
/// seeded by (seed, entity id), so results do not depend on scheduling.
/// Samples are ordered by entity id, shuffled with the seed, and the first
/// round(n * split_ratio) go to train. Files are written only when at least
/// one sample was built.
DatasetSplit build_dataset(const std::vector<std::string>& entity_ids, KgClient& kg, ChatProvider& chat,
                           const BuildOptions& opt);

}  // namespace are::dataset
