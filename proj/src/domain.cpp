#include "are/domain.hpp"

#include <map>
#include <set>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are {

LongFormAnswer::LongFormAnswer(std::string text)
    : text_(std::move(text)), tokens_(text::split_words(text_)) {}

AtomicFact AtomicFact::make(int clause, int fact, std::string text) {
  AtomicFact f;
  f.clause_index = clause;
  f.fact_index = fact;
  f.original_text = text;
  f.text = std::move(text);
  return f;
}

std::size_t AnswerDecomposition::fact_count() const {
  std::size_t n = 0;
  for (const auto& c : clauses) n += c.atomic_facts.size();
  return n;
}

bool AnswerDecomposition::any_edited() const {
  for (const auto& c : clauses)
    for (const auto& f : c.atomic_facts)
      if (f.edited) return true;
  return false;
}

bool EvidenceSet::all_supported() const {
  for (const bool s : supported)
    if (!s) return false;
  return true;
}

std::string_view to_string(VerificationStatus s) {
  switch (s) {
    case VerificationStatus::Supportive: return "supportive";
    case VerificationStatus::EditingRequired: return "editing_required";
    case VerificationStatus::Irrelevant: return "irrelevant";
  }
  return "irrelevant";
}

std::string_view to_string(LoopAction a) {
  switch (a) {
    case LoopAction::None: return "none";
    case LoopAction::Edited: return "edited";
    case LoopAction::ExpandedAndReretrieved: return "expanded_and_reretrieved";
  }
  return "none";
}

std::string_view to_string(TrailTerminal t) {
  return t == TrailTerminal::Resolved ? "resolved" : "exhausted_iterations";
}

VerificationStatus status_from_string(std::string_view s) {
  if (s == "supportive") return VerificationStatus::Supportive;
  if (s == "editing_required") return VerificationStatus::EditingRequired;
  if (s == "irrelevant") return VerificationStatus::Irrelevant;
  throw InputError("unknown verification status: " + std::string(s));
}

LoopAction action_from_string(std::string_view s) {
  if (s == "none") return LoopAction::None;
  if (s == "edited") return LoopAction::Edited;
  if (s == "expanded_and_reretrieved") return LoopAction::ExpandedAndReretrieved;
  throw InputError("unknown loop action: " + std::string(s));
}

TrailTerminal terminal_from_string(std::string_view s) {
  if (s == "resolved") return TrailTerminal::Resolved;
  if (s == "exhausted_iterations") return TrailTerminal::ExhaustedIterations;
  throw InputError("unknown trail terminal: " + std::string(s));
}

std::vector<std::string> validate_decomposition(const AnswerDecomposition& d) {
  std::vector<std::string> out;
  if (d.clauses.empty()) {
    out.emplace_back("decomposition has no clauses");
    return out;
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < d.clauses.size(); ++k) {
    const auto& c = d.clauses[k];
    const int expected = static_cast<int>(k) + 1;
    if (c.index != expected) {
      out.push_back("clause at position " + std::to_string(expected) + " has index " +
                    std::to_string(c.index) + " (indices must be 1..m contiguous)");
    }
    if (text::trim(c.text).empty()) out.push_back("clause " + std::to_string(c.index) + " has empty text");
    if (c.atomic_facts.empty()) out.push_back("clause " + std::to_string(c.index) + " has no atomic facts");
    for (const auto& f : c.atomic_facts) {
      const std::string ref = "(" + std::to_string(f.clause_index) + "," + std::to_string(f.fact_index) + ")";
      if (f.clause_index != c.index) {
        out.push_back("atomic fact " + ref + " is owned by clause " + std::to_string(c.index));
      }
      if (f.fact_index < 1) out.push_back("atomic fact " + ref + " has a non-positive fact index");
      if (!seen.insert({f.clause_index, f.fact_index}).second) {
        out.push_back("duplicate atomic fact index " + ref);
      }
      if (text::trim(f.text).empty()) out.push_back("atomic fact " + ref + " has empty text");
      if (!f.edited && f.text != f.original_text) {
        out.push_back("atomic fact " + ref + " is unedited but differs from its original text");
      }
    }
  }
  return out;
}

std::vector<std::string> validate_trail(const VerificationTrail& t, int max_iterations) {
  std::vector<std::string> out;
  if (static_cast<int>(t.steps.size()) > max_iterations) {
    out.push_back("trail has " + std::to_string(t.steps.size()) + " steps, bound is " +
                  std::to_string(max_iterations));
  }
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    if (t.steps[k].status == VerificationStatus::Supportive && k + 1 != t.steps.size()) {
      out.emplace_back("supportive step is not the last step");
    }
  }
  const bool resolved = !t.steps.empty() && t.steps.back().status == VerificationStatus::Supportive;
  if (resolved != (t.terminal == TrailTerminal::Resolved)) {
    out.emplace_back("terminal state disagrees with the last step");
  }
  return out;
}

// --- JSON -------------------------------------------------------------------

void to_json(Json& j, const Question& v) {
  j = Json{{"id", v.id}, {"text", v.text}};
  j["dataset_tag"] = v.dataset_tag ? Json(*v.dataset_tag) : Json(nullptr);
}

void from_json(const Json& j, Question& v) {
  v.id = j.value("id", std::string{});
  if (j.contains("text")) {
    v.text = j.at("text").get<std::string>();
  } else {
    v.text = j.at("question").get<std::string>();
  }
  v.dataset_tag.reset();
  if (auto it = j.find("dataset_tag"); it != j.end() && !it->is_null()) v.dataset_tag = it->get<std::string>();
}

void to_json(Json& j, const LongFormAnswer& v) {
  j = Json{{"text", v.text()}, {"tokenization", v.tokens()}};
}

void from_json(const Json& j, LongFormAnswer& v) {
  v = LongFormAnswer(j.is_string() ? j.get<std::string>() : j.at("text").get<std::string>());
}

void to_json(Json& j, const AtomicFact& v) {
  j = Json{{"clause_index", v.clause_index},
           {"fact_index", v.fact_index},
           {"text", v.text},
           {"edited", v.edited},
           {"original_text", v.original_text}};
}

void from_json(const Json& j, AtomicFact& v) {
  v.clause_index = j.at("clause_index").get<int>();
  v.fact_index = j.at("fact_index").get<int>();
  v.text = j.at("text").get<std::string>();
  v.edited = j.value("edited", false);
  v.original_text = j.value("original_text", v.text);
}

void to_json(Json& j, const MolecularClause& v) {
  j = Json{{"index", v.index}, {"text", v.text}, {"atomic_facts", v.atomic_facts}};
}

void from_json(const Json& j, MolecularClause& v) {
  v.index = j.at("index").get<int>();
  v.text = j.at("text").get<std::string>();
  v.atomic_facts = j.at("atomic_facts").get<std::vector<AtomicFact>>();
}

void to_json(Json& j, const AnswerDecomposition& v) {
  j = Json{{"answer", v.answer}, {"clauses", v.clauses}};
}

void from_json(const Json& j, AnswerDecomposition& v) {
  v.answer = j.at("answer").get<LongFormAnswer>();
  v.clauses = j.at("clauses").get<std::vector<MolecularClause>>();
}

void to_json(Json& j, const EvidenceItem& v) {
  j = Json{{"snippet", v.snippet},
           {"source_url", v.source_url},
           {"rank_score", v.rank_score},
           {"query_used", v.query_used}};
}

void from_json(const Json& j, EvidenceItem& v) {
  v.snippet = j.at("snippet").get<std::string>();
  v.source_url = j.value("source_url", std::string{});
  v.rank_score = j.value("rank_score", 0.0);
  v.query_used = j.value("query_used", std::string{});
}

void to_json(Json& j, const EvidenceSet& v) {
  j = Json{{"clause_index", v.clause_index},
           {"snippets", v.snippets},
           {"sources", v.sources},
           {"supported", v.supported}};
}

void from_json(const Json& j, EvidenceSet& v) {
  v.clause_index = j.at("clause_index").get<int>();
  v.snippets = j.at("snippets").get<std::vector<std::string>>();
  v.sources = j.value("sources", std::vector<std::string>(v.snippets.size()));
  v.supported = j.value("supported", std::vector<bool>(v.snippets.size(), true));
  if (v.sources.size() != v.snippets.size() || v.supported.size() != v.snippets.size()) {
    throw InputError("evidence set lists are not parallel");
  }
}

void to_json(Json& j, const TrailStep& v) {
  j = Json{{"iteration", v.iteration},
           {"status", to_string(v.status)},
           {"action", to_string(v.action)}};
  j["evidence"] = v.evidence ? Json(*v.evidence) : Json(nullptr);
}

void from_json(const Json& j, TrailStep& v) {
  v.iteration = j.at("iteration").get<int>();
  v.status = status_from_string(j.at("status").get<std::string>());
  v.action = action_from_string(j.at("action").get<std::string>());
  v.evidence.reset();
  if (auto it = j.find("evidence"); it != j.end() && !it->is_null()) v.evidence = it->get<EvidenceItem>();
}

void to_json(Json& j, const VerificationTrail& v) {
  j = Json{{"fact_ref", Json::array({v.fact.clause, v.fact.fact})},
           {"steps", v.steps},
           {"terminal", to_string(v.terminal)}};
  j["final_evidence"] = v.final_evidence ? Json(*v.final_evidence) : Json(nullptr);
}

void from_json(const Json& j, VerificationTrail& v) {
  const auto& ref = j.at("fact_ref");
  v.fact = {ref.at(0).get<int>(), ref.at(1).get<int>()};
  v.steps = j.at("steps").get<std::vector<TrailStep>>();
  v.terminal = terminal_from_string(j.at("terminal").get<std::string>());
  v.final_evidence.reset();
  if (auto it = j.find("final_evidence"); it != j.end() && !it->is_null()) {
    v.final_evidence = it->get<EvidenceItem>();
  }
}

void to_json(Json& j, const RunCounters& v) {
  j = Json{{"llm_interactions", v.llm_interactions},
           {"tokens_consumed", v.tokens_consumed},
           {"retrieval_calls", v.retrieval_calls},
           {"wall_seconds", v.wall_seconds}};
}

void from_json(const Json& j, RunCounters& v) {
  v.llm_interactions = j.value("llm_interactions", 0LL);
  v.tokens_consumed = j.value("tokens_consumed", 0LL);
  v.retrieval_calls = j.value("retrieval_calls", 0LL);
  v.wall_seconds = j.value("wall_seconds", 0.0);
}

void to_json(Json& j, const AttributionResult& v) {
  j = Json{{"question", v.question},
           {"original", v.original},
           {"revised", v.revised},
           {"decomposition", v.decomposition},
           {"revised_clauses", v.revised_clauses},
           {"report", v.report},
           {"trails", v.trails},
           {"counters", v.counters},
           {"revision_ran", v.revision_ran},
           {"warnings", v.warnings}};
}

void from_json(const Json& j, AttributionResult& v) {
  v.question = j.at("question").get<Question>();
  v.original = j.at("original").get<LongFormAnswer>();
  v.revised = j.at("revised").get<LongFormAnswer>();
  v.decomposition = j.at("decomposition").get<AnswerDecomposition>();
  v.revised_clauses = j.at("revised_clauses").get<std::vector<std::string>>();
  v.report = j.at("report").get<std::vector<EvidenceSet>>();
  v.trails = j.at("trails").get<std::vector<VerificationTrail>>();
  v.counters = j.at("counters").get<RunCounters>();
  v.revision_ran = j.value("revision_ran", true);
  v.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(Json& j, const MetricsReport& v) {
  auto opt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
  j = Json{{"attr_r", v.attr_r}, {"attr_p", v.attr_p}};
  j["pres"] = opt(v.pres);
  j["f1_rp"] = opt(v.f1_rp);
  j["f1_pp"] = opt(v.f1_pp);
}

void from_json(const Json& j, MetricsReport& v) {
  auto opt = [&](const char* k) -> std::optional<double> {
    auto it = j.find(k);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
  };
  v.attr_r = j.at("attr_r").get<double>();
  v.attr_p = j.at("attr_p").get<double>();
  v.pres = opt("pres");
  v.f1_rp = opt("f1_rp");
  v.f1_pp = opt("f1_pp");
}

}  // namespace are
