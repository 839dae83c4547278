#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "are/config.hpp"
#include "are/domain.hpp"
#include "are/metrics.hpp"
#include "are/providers.hpp"
#include "are/retrieval.hpp"
#include "are/verify_edit.hpp"

// End-to-end orchestration: answer -> decompose -> per-fact retrieve and
// verify/edit -> aggregate -> backtrack, plus batch runs and their evaluation.
namespace are::pipeline {

struct PipelineOptions {
  verify_edit::LoopOptions loop;
  int search_k = 5;
  int fact_parallelism = 4;
  int max_output_tokens = 512;
  double temperature = 0.0;

  static PipelineOptions from_config(const Config& cfg);
};

/// One question through the whole pipeline. A failing fact is kept in the
/// answer, left without evidence and noted in `warnings`; only a failure to
/// generate or decompose the answer aborts the question. Counters cover
/// exactly this question. Facts run concurrently but results are ordered by
/// (clause, fact).
AttributionResult run_pipeline(const Question& q, const ProviderBundle& providers, const PipelineOptions& opt,
                               retrieval::SearchCache* cache = nullptr);

/// The AttributionResult encoding plus id, attribution_report and metrics
/// (null when not computed).
Json run_record(const AttributionResult& r, const std::optional<MetricsReport>& m);

/// {id, question, error}
Json error_record(const Question& q, const std::string& error);

/// Structural check of one run-record line against the documented schema.
/// Error records are valid records. Empty means valid.
std::vector<std::string> validate_run_record(const Json& rec);

struct BatchResult {
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::vector<std::string> warnings;
};

/// Runs every question and writes one JSON line per question in input order.
/// Metrics are attached when the bundle has an NLI provider.
BatchResult run_batch(const std::vector<Question>& questions, const ProviderBundle& providers,
                      const PipelineOptions& opt, int question_parallelism, std::ostream& out,
                      retrieval::SearchCache* cache = nullptr);

/// Per-sample cost averages in the shape of an inference-efficiency table.
struct CostSummary {
  std::size_t samples = 0;
  double latency_s = 0.0;
  double interactions = 0.0;
  double tokens = 0.0;
  double retrievals = 0.0;
};

struct EvaluationOutput {
  std::vector<metrics::MetricsRow> rows;
  CostSummary cost;
  std::vector<std::string> warnings;  ///< Skipped or malformed records.
};

/// Scores every successful record of a run file. Error records and malformed
/// lines are skipped with a warning.
EvaluationOutput evaluate_run(std::istream& records, NliProvider& scorer, const metrics::EvaluateOptions& opt = {});

/// samples,latency_s,interactions,tokens,retrievals (per-sample means).
void write_cost_csv(std::ostream& out, const CostSummary& s);

}  // namespace are::pipeline
