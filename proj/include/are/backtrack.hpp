#pragma once

#include <string>
#include <vector>

#include "are/domain.hpp"
#include "are/llm.hpp"

// Reassembly of the revised answer from (possibly edited) atomic facts, and
// per-clause evidence aggregation into the attribution report.
namespace are::backtrack {

struct BacktrackResult {
  LongFormAnswer answer;                   ///< X'.
  std::vector<std::string> clause_texts;   ///< Revised text per clause, parallel to d.clauses.
  bool provider_called = false;
  bool used_fallback = false;
};

/// JSON payload handed to the backtracking prompt: the reference answer and
/// the current facts of every clause.
std::string backtrack_payload(const AnswerDecomposition& d);

/// Text after the last "Sentences:" marker (the whole reply without one).
std::string extract_sentences(std::string_view reply);

/// Deterministic re-rendering of one clause: each edited fact replaces its
/// original text inside the clause, or failing that the smallest differing
/// word span; a fact that cannot be located is appended.
std::string splice_clause(const MolecularClause& clause);

/// Rebuilds X'. Without edits X' is X byte for byte and the provider is not
/// called. Otherwise the model re-renders the answer; only clauses holding an
/// edited fact take the model's sentence, all others keep their original text.
/// A blank reply, or one whose sentence count differs from the clause count,
/// switches to splice_clause() for the edited clauses.
BacktrackResult backtrack(const AnswerDecomposition& d, LlmClient& llm,
                          std::vector<std::string>* warnings = nullptr);

/// Replaces each clause text of X in place by its revision; when a clause
/// cannot be found in X the revised clauses are joined with spaces instead.
std::string reassemble(const AnswerDecomposition& d, const std::vector<std::string>& clause_texts);

/// One EvidenceSet per clause in clause order. Snippets follow fact order and
/// are de-duplicated after whitespace normalization; a snippet is flagged
/// supported only if every fact contributing it was resolved. Throws
/// PreconditionError when a fact has no trail.
std::vector<EvidenceSet> aggregate_evidence(const std::vector<VerificationTrail>& trails,
                                            const AnswerDecomposition& d);

/// {clauses:[{index, text, revised_text, evidence:[{snippet, url, supported}]}]}
Json attribution_report_json(const AnswerDecomposition& d, const std::vector<std::string>& revised_clauses,
                             const std::vector<EvidenceSet>& report);

}  // namespace are::backtrack
