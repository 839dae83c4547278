#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "are/domain.hpp"
#include "are/llm.hpp"

// Molecular-to-atomic decomposition: answer generation, the decomposition
// call with its JSON repair path, and decomposition quality scores.
namespace are::decomposition {

/// Generates the long-form answer X. A blank generation is retried once,
/// then EmptyGeneration is thrown.
LongFormAnswer generate_answer(const Question& q, LlmClient& llm);

/// Pulls the long-form text out of a "1.Question/2.Explanation/3.Answer"
/// style reply: the explanation when present, else the answer part, else
/// the whole reply.
std::string extract_answer_text(std::string_view raw);

/// Decomposes X with one repair reprompt; a second parse failure falls back to
/// sentence_split_fallback(). Every returned value passes validate_decomposition.
/// `warnings` (optional) receives a note when the fallback was used.
AnswerDecomposition decompose(const LongFormAnswer& x, LlmClient& llm,
                              std::vector<std::string>* warnings = nullptr);

/// Parses {"output":[{clause: [facts...]}, ...]}. Keys of the form "MF<n>"
/// are labels: clauses are then ordered by n (ties keep appearance order)
/// and take their text from the n-th sentence of x when the counts agree.
/// Other keys are the clause text itself, kept in appearance order.
AnswerDecomposition parse_decomposition_json(std::string_view raw, const LongFormAnswer& x);

/// Canonical {"output":[{clause: [facts]}]} encoding of a decomposition.
std::string serialize_decomposition_json(const AnswerDecomposition& d);

/// One clause per sentence, one fact per clause.
AnswerDecomposition sentence_split_fallback(const LongFormAnswer& x);

/// Substring from the first '{' to the last '}' (models like to wrap JSON in prose).
std::string_view extract_json_object(std::string_view raw);

struct LevelScores {
  double molecular = 0.0;
  double atomic = 0.0;
};

/// 1 - |a - b| / max(a, b), clamped to [0, 1].
double count_consistency(std::size_t predicted, std::size_t gold);

/// n_c at clause level and at fact level.
LevelScores consistency_score(const AnswerDecomposition& pred, const AnswerDecomposition& gold);

/// d_correct: share of units judged (binary) entailed by the source answer,
/// per level. Provider errors propagate.
LevelScores correctness_score(const AnswerDecomposition& pred, NliProvider& judge);

}  // namespace are::decomposition
