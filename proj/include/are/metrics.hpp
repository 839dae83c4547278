#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "are/domain.hpp"
#include "are/providers.hpp"

// Attribution and preservation metrics over (X, X', A).
namespace are::metrics {

/// Levenshtein distance with unit insert/delete/substitute costs, two-row DP.
template <class T>
std::size_t edit_distance(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

enum class Granularity { Word, Character };

/// Unicode code points of the whitespace-normalized text.
std::vector<std::string> char_tokens(std::string_view s);

/// max(1 - Lev(X, X') / len(X), 0). Throws PreconditionError for an empty X.
double preservation(const LongFormAnswer& x, const LongFormAnswer& x_rev, Granularity g = Granularity::Word);

/// Snippets joined with single spaces, in set order.
std::string premise_of(const EvidenceSet& e);

/// Mean over clauses of the best entailment probability of the clause text
/// under any evidence set of the report. Empty report or no clauses: 0.
double attr_r(const std::vector<std::string>& clause_texts, const std::vector<EvidenceSet>& report,
              NliProvider& scorer);
double attr_r(const AnswerDecomposition& d, const std::vector<EvidenceSet>& report, NliProvider& scorer);

/// Share of clauses whose own evidence set is judged (binary) to entail the
/// clause text. Empty report: 0. Throws PreconditionError when the report is
/// not aligned with the clauses.
double attr_p(const AnswerDecomposition& d, const std::vector<EvidenceSet>& report, NliProvider& scorer);

/// attr_p, additionally requiring every atomic fact of the clause to be
/// entailed by its own final evidence snippet. Facts without evidence fail.
double attr_p_strict(const AnswerDecomposition& d, const std::vector<EvidenceSet>& report,
                     const std::vector<VerificationTrail>& trails, NliProvider& scorer);

/// Harmonic mean; 0 when a + b == 0.
double f1(double a, double b);

enum class AttrPMode { FormulaLiteral, Strict };

struct EvaluateOptions {
  Granularity granularity = Granularity::Word;
  AttrPMode attr_p_mode = AttrPMode::FormulaLiteral;
};

/// Decomposition of X' used for scoring: revised clause texts over the
/// post-loop facts.
AnswerDecomposition revised_decomposition(const AttributionResult& r);

/// All metrics for one run. Pres and the F1 scores are left empty when the
/// revision stage did not run.
MetricsReport evaluate(const AttributionResult& r, NliProvider& scorer, const EvaluateOptions& opt = {});

struct MetricsRow {
  std::string id;
  MetricsReport report;
};

/// "-" for an absent value, otherwise six decimals.
std::string format_metric(const std::optional<double>& v);

/// CSV with header id,attr_r,attr_p,pres,f1_rp,f1_pp, one row per sample and
/// a final "mean" row (means over the samples where the value is present).
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace are::metrics
