#include "are/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>

#include "are/backtrack.hpp"
#include "are/decomposition.hpp"
#include "are/errors.hpp"
#include "are/llm.hpp"
#include "are/parallel.hpp"
#include "are/text.hpp"

namespace are::pipeline {

PipelineOptions PipelineOptions::from_config(const Config& cfg) {
  PipelineOptions o;
  o.loop.max_iterations = cfg.max_iterations;
  o.loop.allow_edit = cfg.allow_edit;
  o.loop.allow_reretrieval = cfg.allow_reretrieval;
  o.search_k = cfg.search_k;
  o.fact_parallelism = cfg.fact_parallelism;
  o.max_output_tokens = cfg.chat_max_tokens;
  o.temperature = cfg.chat_temperature;
  return o;
}

namespace {

std::string ref_text(int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

}  // namespace

AttributionResult run_pipeline(const Question& q, const ProviderBundle& providers, const PipelineOptions& opt,
                               retrieval::SearchCache* cache) {
  if (!providers.chat || !providers.search || !providers.embed) {
    throw ConfigError("pipeline needs chat, search and embedding providers");
  }
  const SteadyClock steady;
  const Clock& clock = providers.clock ? *providers.clock : static_cast<const Clock&>(steady);
  const double t0 = clock.now_seconds();

  CounterSink sink;
  LlmClient llm(*providers.chat, &sink, opt.max_output_tokens, opt.temperature);
  AttributionResult r;
  r.question = q;
  r.original = decomposition::generate_answer(q, llm);
  auto d = decomposition::decompose(r.original, llm, &r.warnings);

  std::vector<AtomicFact*> facts;
  for (auto& c : d.clauses) {
    for (auto& f : c.atomic_facts) facts.push_back(&f);
  }
  retrieval::Retriever retriever(*providers.search, *providers.embed, opt.search_k, cache);
  std::vector<std::optional<verify_edit::LoopResult>> loops(facts.size());
  std::vector<std::string> failures(facts.size());
  parallel_for(facts.size(), opt.fact_parallelism, [&](std::size_t k) {
    try {
      loops[k] = verify_edit::verify_edit_loop(*facts[k], retriever, llm, &sink, opt.loop);
    } catch (const Error& e) {
      failures[k] = e.what();
    }
  });

  for (std::size_t k = 0; k < facts.size(); ++k) {
    auto& f = *facts[k];
    if (loops[k]) {
      f = loops[k]->fact;
      r.trails.push_back(std::move(loops[k]->trail));
      for (auto& w : loops[k]->warnings) r.warnings.push_back(std::move(w));
    } else {
      VerificationTrail t;
      t.fact = {f.clause_index, f.fact_index};
      t.terminal = TrailTerminal::ExhaustedIterations;
      r.trails.push_back(std::move(t));
      r.warnings.push_back("fact " + ref_text(f.clause_index, f.fact_index) + " left unattributed: " + failures[k]);
    }
  }

  r.report = backtrack::aggregate_evidence(r.trails, d);
  if (opt.loop.allow_edit) {
    auto bt = backtrack::backtrack(d, llm, &r.warnings);
    r.revised = std::move(bt.answer);
    r.revised_clauses = std::move(bt.clause_texts);
    r.revision_ran = true;
  } else {
    r.revised = r.original;
    for (const auto& c : d.clauses) r.revised_clauses.push_back(c.text);
    r.revision_ran = false;
  }
  r.decomposition = std::move(d);
  r.counters = sink.snapshot();
  r.counters.wall_seconds = std::max(0.0, clock.now_seconds() - t0);
  return r;
}

Json run_record(const AttributionResult& r, const std::optional<MetricsReport>& m) {
  Json j = r;
  j["id"] = r.question.id;
  j["attribution_report"] = backtrack::attribution_report_json(r.decomposition, r.revised_clauses, r.report);
  j["metrics"] = m ? Json(*m) : Json(nullptr);
  return j;
}

Json error_record(const Question& q, const std::string& error) {
  return Json{{"id", q.id}, {"question", q}, {"error", error}};
}

std::vector<std::string> validate_run_record(const Json& rec) {
  std::vector<std::string> out;
  if (!rec.is_object()) return {"record is not an object"};
  auto need = [&](const char* key, auto pred, const char* what) {
    const auto it = rec.find(key);
    if (it == rec.end()) {
      out.push_back(std::string("missing \"") + key + "\"");
      return false;
    }
    if (!pred(*it)) {
      out.push_back(std::string("\"") + key + "\" is not " + what);
      return false;
    }
    return true;
  };
  const auto is_obj = [](const Json& j) { return j.is_object(); };
  const auto is_arr = [](const Json& j) { return j.is_array(); };
  const auto is_str = [](const Json& j) { return j.is_string(); };

  need("id", is_str, "a string");
  const bool question_ok = need("question", is_obj, "an object");
  if (question_ok && !rec.at("question").contains("text")) out.emplace_back("question has no text");
  if (rec.contains("error")) {
    need("error", is_str, "a string");
    return out;
  }

  AttributionResult r;
  try {
    r = rec.get<AttributionResult>();
  } catch (const std::exception& e) {
    out.push_back(std::string("record does not decode: ") + e.what());
    return out;
  }
  need("attribution_report", is_obj, "an object");
  need("trails", is_arr, "an array");

  for (const auto& v : validate_decomposition(r.decomposition)) out.push_back("decomposition: " + v);
  const auto m = r.decomposition.clauses.size();
  if (r.report.size() != m) {
    out.push_back("report has " + std::to_string(r.report.size()) + " sets for " + std::to_string(m) + " clauses");
  }
  std::set<int> seen;
  for (const auto& e : r.report) {
    if (!seen.insert(e.clause_index).second) out.push_back("clause " + std::to_string(e.clause_index) + " reported twice");
    if (e.snippets.size() != e.sources.size() || e.snippets.size() != e.supported.size()) {
      out.push_back("evidence set " + std::to_string(e.clause_index) + " has ragged columns");
    }
    std::set<std::string> norm;
    for (const auto& s : e.snippets) {
      if (!norm.insert(text::normalize_ws(s)).second) {
        out.push_back("evidence set " + std::to_string(e.clause_index) + " repeats a snippet");
      }
    }
  }
  if (r.revised_clauses.size() != m) out.emplace_back("revised_clauses is not parallel to the clauses");
  if (r.trails.size() != r.decomposition.fact_count()) out.emplace_back("trail count differs from fact count");
  for (const auto& t : r.trails) {
    for (const auto& v : validate_trail(t, static_cast<int>(t.steps.size()))) {
      out.push_back("trail " + ref_text(t.fact.clause, t.fact.fact) + ": " + v);
    }
  }
  const auto& c = r.counters;
  if (c.llm_interactions < 0 || c.tokens_consumed < 0 || c.retrieval_calls < 0 || c.wall_seconds < 0) {
    out.emplace_back("negative counter");
  }
  if (const auto ar = rec.find("attribution_report"); ar != rec.end() && ar->is_object()) {
    const auto cl = ar->find("clauses");
    if (cl == ar->end() || !cl->is_array() || cl->size() != m) {
      out.emplace_back("attribution_report.clauses is not parallel to the clauses");
    }
  }

  const auto mt = rec.find("metrics");
  if (mt == rec.end()) {
    out.emplace_back("missing \"metrics\"");
  } else if (!mt->is_null()) {
    MetricsReport mr;
    try {
      mr = mt->get<MetricsReport>();
    } catch (const std::exception& e) {
      out.push_back(std::string("metrics do not decode: ") + e.what());
      return out;
    }
    auto in_unit = [&](const char* name, const std::optional<double>& v) {
      if (v && !(*v >= 0.0 && *v <= 1.0)) out.push_back(std::string("metric ") + name + " outside [0, 1]");
    };
    in_unit("attr_r", mr.attr_r);
    in_unit("attr_p", mr.attr_p);
    in_unit("pres", mr.pres);
    in_unit("f1_rp", mr.f1_rp);
    in_unit("f1_pp", mr.f1_pp);
    if (mr.pres && mr.f1_rp && std::abs(*mr.f1_rp - metrics::f1(mr.attr_r, *mr.pres)) > 1e-9) {
      out.emplace_back("f1_rp is not the harmonic mean of attr_r and pres");
    }
    if (mr.pres && mr.f1_pp && std::abs(*mr.f1_pp - metrics::f1(mr.attr_p, *mr.pres)) > 1e-9) {
      out.emplace_back("f1_pp is not the harmonic mean of attr_p and pres");
    }
  }
  return out;
}

BatchResult run_batch(const std::vector<Question>& questions, const ProviderBundle& providers,
                      const PipelineOptions& opt, int question_parallelism, std::ostream& out,
                      retrieval::SearchCache* cache) {
  std::vector<std::string> lines(questions.size());
  std::vector<bool> ok(questions.size(), false);
  std::vector<std::vector<std::string>> notes(questions.size());
  parallel_for(questions.size(), question_parallelism, [&](std::size_t i) {
    const auto& q = questions[i];
    try {
      const auto r = run_pipeline(q, providers, opt, cache);
      std::optional<MetricsReport> m;
      if (providers.nli) {
        try {
          m = metrics::evaluate(r, *providers.nli);
        } catch (const Error& e) {
          notes[i].push_back(q.id + ": metrics skipped: " + e.what());
        }
      }
      for (const auto& w : r.warnings) notes[i].push_back(q.id + ": " + w);
      lines[i] = run_record(r, m).dump();
      ok[i] = true;
    } catch (const Error& e) {
      lines[i] = error_record(q, e.what()).dump();
      notes[i].push_back(q.id + ": failed: " + e.what());
    }
  });

  BatchResult b;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    out << lines[i] << '\n';
    (ok[i] ? b.succeeded : b.failed) += 1;
    for (auto& n : notes[i]) b.warnings.push_back(std::move(n));
  }
  return b;
}

EvaluationOutput evaluate_run(std::istream& records, NliProvider& scorer, const metrics::EvaluateOptions& opt) {
  EvaluationOutput out;
  std::string line;
  int n = 0;
  double latency = 0.0;
  double interactions = 0.0;
  double tokens = 0.0;
  double retrievals = 0.0;
  while (std::getline(records, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    const auto where = "line " + std::to_string(n);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      out.warnings.push_back(where + ": not JSON, skipped");
      continue;
    }
    if (j.is_object() && j.contains("error")) {
      out.warnings.push_back(where + ": error record for " + j.value("id", std::string("?")) + ", skipped");
      continue;
    }
    if (const auto problems = validate_run_record(j); !problems.empty()) {
      out.warnings.push_back(where + ": malformed record (" + problems.front() + "), skipped");
      continue;
    }
    const auto r = j.get<AttributionResult>();
    try {
      out.rows.push_back({j.value("id", r.question.id), metrics::evaluate(r, scorer, opt)});
    } catch (const PreconditionError& e) {
      out.warnings.push_back(where + ": " + e.what() + ", skipped");
      continue;
    }
    latency += r.counters.wall_seconds;
    interactions += static_cast<double>(r.counters.llm_interactions);
    tokens += static_cast<double>(r.counters.tokens_consumed);
    retrievals += static_cast<double>(r.counters.retrieval_calls);
  }
  out.cost.samples = out.rows.size();
  if (!out.rows.empty()) {
    const auto k = static_cast<double>(out.rows.size());
    out.cost.latency_s = latency / k;
    out.cost.interactions = interactions / k;
    out.cost.tokens = tokens / k;
    out.cost.retrievals = retrievals / k;
  }
  return out;
}

void write_cost_csv(std::ostream& out, const CostSummary& s) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f", s.samples, s.latency_s, s.interactions, s.tokens,
                s.retrievals);
  out << "samples,latency_s,interactions,tokens,retrievals\n" << buf << '\n';
}

}  // namespace are::pipeline
