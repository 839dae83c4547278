#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "are/domain.hpp"
#include "are/llm.hpp"
#include "are/retrieval.hpp"

// The three-state evidence verifier and the bounded verify/edit/expand loop
// run for every atomic fact.
namespace are::verify_edit {

/// Reads the verdict from a verifier reply. With a "Therefore" marker the
/// first verdict after the last marker wins; otherwise the reply must be a
/// bare verdict ("2", "irrelevant", ...).
std::optional<VerificationStatus> parse_verdict(std::string_view reply);

/// One verifier call, plus one reprompt if the reply has no verdict. Still
/// unparseable after that: Irrelevant.
VerificationStatus verify(const AtomicFact& fact, const EvidenceItem& evidence, LlmClient& llm);

/// Rewrites the fact from the evidence. Keeps (i, j) and original_text and
/// sets edited=true. Throws EmptyEdit when the model produced no fix and
/// PreconditionError when the evidence is the fact itself. An echo of the
/// input is accepted and reported through `warnings`.
AtomicFact edit_fact(const AtomicFact& fact, const EvidenceItem& evidence, LlmClient& llm,
                     std::vector<std::string>* warnings = nullptr);

/// Two search phrases for re-retrieval; missing phrases are padded with the
/// fact text.
std::vector<std::string> expand_fact(const AtomicFact& fact, LlmClient& llm);

struct LoopOptions {
  int max_iterations = 4;
  bool allow_edit = true;         ///< false: stop at the first editing-required verdict.
  bool allow_reretrieval = true;  ///< false: stop at the first irrelevant verdict.
};

struct LoopResult {
  AtomicFact fact;
  std::optional<EvidenceItem> evidence;
  VerificationTrail trail;
  std::vector<std::string> warnings;
};

/// Retrieves evidence for the fact, then iterates at most max_iterations
/// times:
///   supportive        -> stop, resolved
///   editing required  -> edit the fact, re-verify against the same evidence
///   irrelevant        -> expand the fact and retrieve with each phrase in
///                        turn until one yields evidence
/// No evidence at all counts as irrelevant. The last iteration never
/// re-retrieves (nothing would verify the result), so an always-irrelevant
/// fact costs exactly max_iterations retrievals.
LoopResult verify_edit_loop(const AtomicFact& fact, const retrieval::Retriever& retriever, LlmClient& llm,
                            CounterSink* counters, const LoopOptions& options = {});

}  // namespace are::verify_edit
