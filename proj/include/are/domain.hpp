#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

// Shared value types for the attribution pipeline. No I/O lives here.
//
// Indices follow the MF_i / AF_ij convention: clauses and facts are 1-based
// and every serialized form carries its indices explicitly.
namespace are {

using Json = nlohmann::json;

struct Question {
  std::string id;
  std::string text;
  std::optional<std::string> dataset_tag;

  bool operator==(const Question&) const = default;
};

/// Answer text plus its word tokenization (Unicode whitespace split,
/// punctuation kept attached to words).
class LongFormAnswer {
 public:
  LongFormAnswer() = default;
  explicit LongFormAnswer(std::string text);

  const std::string& text() const { return text_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool empty() const { return tokens_.empty(); }

  bool operator==(const LongFormAnswer& o) const { return text_ == o.text_; }

 private:
  std::string text_;
  std::vector<std::string> tokens_;
};

struct AtomicFact {
  int clause_index = 0;
  int fact_index = 0;
  std::string text;
  bool edited = false;
  std::string original_text;  ///< Pre-edit text; equals `text` while unedited.

  static AtomicFact make(int clause, int fact, std::string text);
  bool operator==(const AtomicFact&) const = default;
};

struct MolecularClause {
  int index = 0;
  std::string text;
  std::vector<AtomicFact> atomic_facts;

  bool operator==(const MolecularClause&) const = default;
};

struct AnswerDecomposition {
  LongFormAnswer answer;
  std::vector<MolecularClause> clauses;

  std::size_t fact_count() const;
  bool any_edited() const;
  bool operator==(const AnswerDecomposition&) const = default;
};

struct EvidenceItem {
  std::string snippet;
  std::string source_url;
  double rank_score = 0.0;  ///< Cosine relevance, within [-1, 1].
  std::string query_used;

  bool operator==(const EvidenceItem&) const = default;
};

/// Evidence aggregated for one clause (E_i). `supported` runs parallel to
/// `snippets` and is false when the contributing fact never reached a
/// supportive verdict.
struct EvidenceSet {
  int clause_index = 0;
  std::vector<std::string> snippets;
  std::vector<std::string> sources;
  std::vector<bool> supported;

  bool all_supported() const;
  bool operator==(const EvidenceSet&) const = default;
};

enum class VerificationStatus { Supportive = 1, EditingRequired = 2, Irrelevant = 3 };

enum class LoopAction { None, Edited, ExpandedAndReretrieved };

enum class TrailTerminal { Resolved, ExhaustedIterations };

struct FactRef {
  int clause = 0;
  int fact = 0;

  auto operator<=>(const FactRef&) const = default;
};

struct TrailStep {
  int iteration = 0;
  VerificationStatus status = VerificationStatus::Irrelevant;
  LoopAction action = LoopAction::None;
  std::optional<EvidenceItem> evidence;  ///< Absent when nothing was retrieved.

  bool operator==(const TrailStep&) const = default;
};

struct VerificationTrail {
  FactRef fact;
  std::vector<TrailStep> steps;
  TrailTerminal terminal = TrailTerminal::ExhaustedIterations;
  std::optional<EvidenceItem> final_evidence;

  bool operator==(const VerificationTrail&) const = default;
};

struct RunCounters {
  long long llm_interactions = 0;
  long long tokens_consumed = 0;
  long long retrieval_calls = 0;
  double wall_seconds = 0.0;

  bool operator==(const RunCounters&) const = default;
};

struct AttributionResult {
  Question question;
  LongFormAnswer original;
  LongFormAnswer revised;
  AnswerDecomposition decomposition;      ///< Post-loop facts (edited ones flagged).
  std::vector<std::string> revised_clauses;  ///< Clause texts of X', parallel to clauses.
  std::vector<EvidenceSet> report;
  std::vector<VerificationTrail> trails;
  RunCounters counters;
  bool revision_ran = true;
  std::vector<std::string> warnings;  ///< Degradations that did not abort the run.

  bool operator==(const AttributionResult&) const = default;
};

/// Pres and the two F1 scores are absent when no revision stage ran.
struct MetricsReport {
  double attr_r = 0.0;
  double attr_p = 0.0;
  std::optional<double> pres;
  std::optional<double> f1_rp;
  std::optional<double> f1_pp;

  bool operator==(const MetricsReport&) const = default;
};

std::string_view to_string(VerificationStatus s);
std::string_view to_string(LoopAction a);
std::string_view to_string(TrailTerminal t);
VerificationStatus status_from_string(std::string_view s);
LoopAction action_from_string(std::string_view s);
TrailTerminal terminal_from_string(std::string_view s);

/// Structural check of every decomposition invariant. Violations are returned
/// as human-readable strings; an empty list means the value is well formed.
std::vector<std::string> validate_decomposition(const AnswerDecomposition& d);

/// Trail invariants: length bound and supportive-is-last.
std::vector<std::string> validate_trail(const VerificationTrail& t, int max_iterations);

// Canonical JSON encoding (snake_case field names).
void to_json(Json& j, const Question& v);
void from_json(const Json& j, Question& v);
void to_json(Json& j, const LongFormAnswer& v);
void from_json(const Json& j, LongFormAnswer& v);
void to_json(Json& j, const AtomicFact& v);
void from_json(const Json& j, AtomicFact& v);
void to_json(Json& j, const MolecularClause& v);
void from_json(const Json& j, MolecularClause& v);
void to_json(Json& j, const AnswerDecomposition& v);
void from_json(const Json& j, AnswerDecomposition& v);
void to_json(Json& j, const EvidenceItem& v);
void from_json(const Json& j, EvidenceItem& v);
void to_json(Json& j, const EvidenceSet& v);
void from_json(const Json& j, EvidenceSet& v);
void to_json(Json& j, const TrailStep& v);
void from_json(const Json& j, TrailStep& v);
void to_json(Json& j, const VerificationTrail& v);
void from_json(const Json& j, VerificationTrail& v);
void to_json(Json& j, const RunCounters& v);
void from_json(const Json& j, RunCounters& v);
void to_json(Json& j, const AttributionResult& v);
void from_json(const Json& j, AttributionResult& v);
void to_json(Json& j, const MetricsReport& v);
void from_json(const Json& j, MetricsReport& v);

}  // namespace are
