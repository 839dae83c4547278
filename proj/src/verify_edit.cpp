#include "are/verify_edit.hpp"

#include <regex>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are::verify_edit {

namespace {

const std::regex& verdict_token() {
  static const std::regex re(R"(\b([123])\b|(supportive|supported)|(editing required|edit required|needs editing)|(irrelevant|not relevant))",
                             std::regex::icase);
  return re;
}

VerificationStatus from_match(const std::smatch& m) {
  if (m[1].matched) return static_cast<VerificationStatus>(std::stoi(m[1].str()));
  if (m[2].matched) return VerificationStatus::Supportive;
  if (m[3].matched) return VerificationStatus::EditingRequired;
  return VerificationStatus::Irrelevant;
}

std::string strip_quotes(std::string s) {
  s = text::trim(s);
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = text::trim(s.substr(1, s.size() - 2));
  }
  return s;
}

// Leading list markers such as "-", "*", "1.", "2)".
std::string strip_list_marker(const std::string& line) {
  static const std::regex marker(R"(^\s*(?:[-*•]|\d+[.)])\s*)");
  return std::regex_replace(line, marker, "", std::regex_constants::format_first_only);
}

}  // namespace

std::optional<VerificationStatus> parse_verdict(std::string_view reply) {
  const std::string folded = text::casefold(reply);
  const auto marker = folded.rfind("therefore");
  std::smatch m;
  if (marker != std::string::npos) {
    const std::string region(reply.substr(marker + 9));
    if (std::regex_search(region, m, verdict_token())) return from_match(m);
    return std::nullopt;
  }
  static const std::regex bare(R"(^\W*(?:([123])|(supportive|supported)|(editing required|edit required|needs editing)|(irrelevant|not relevant))\W*(?:\([^)]*\))?\W*$)",
                               std::regex::icase);
  const std::string trimmed = text::trim(reply);
  if (std::regex_match(trimmed, m, bare)) return from_match(m);
  return std::nullopt;
}

VerificationStatus verify(const AtomicFact& fact, const EvidenceItem& evidence, LlmClient& llm) {
  if (text::trim(evidence.snippet).empty()) throw PreconditionError("verify: evidence snippet is empty");
  const Json vars{{"fact", fact.text}, {"evidence", evidence.snippet}};
  const auto first = llm.complete("verify", vars);
  if (auto v = parse_verdict(first.text)) return *v;
  auto retry_vars = vars;
  retry_vars["previous"] = first.text;
  const auto second = llm.complete("verify+verdict_repair", retry_vars);
  if (auto v = parse_verdict(second.text)) return *v;
  return VerificationStatus::Irrelevant;
}

AtomicFact edit_fact(const AtomicFact& fact, const EvidenceItem& evidence, LlmClient& llm,
                     std::vector<std::string>* warnings) {
  if (text::casefold(text::normalize_ws(evidence.snippet)) == text::casefold(text::normalize_ws(fact.text))) {
    throw PreconditionError("edit_fact: evidence is identical to the fact, nothing to edit against");
  }
  const auto resp = llm.complete("edit", {{"fact", fact.text}, {"evidence", evidence.snippet}});

  std::string fix;
  const std::string folded = text::casefold(resp.text);
  if (const auto pos = folded.rfind("my fix:"); pos != std::string::npos) {
    auto rest = resp.text.substr(pos + 7);
    fix = rest.substr(0, rest.find('\n'));
  } else if (resp.text.find('\n') == std::string::npos) {
    fix = resp.text;
  } else {
    fix = text::trim(resp.text);
    if (fix.find('\n') != std::string::npos) fix.clear();
  }
  fix = text::normalize_ws(strip_quotes(fix));
  if (fix.empty()) throw EmptyEdit();

  AtomicFact out = fact;
  if (fix == text::normalize_ws(fact.text) && warnings != nullptr) {
    warnings->push_back("NoOpEdit: editor echoed fact (" + std::to_string(fact.clause_index) + "," +
                        std::to_string(fact.fact_index) + ")");
  }
  out.text = std::move(fix);
  out.edited = true;
  return out;
}

std::vector<std::string> expand_fact(const AtomicFact& fact, LlmClient& llm) {
  const auto resp = llm.complete("expand", {{"fact", fact.text}});
  std::vector<std::string> phrases;
  std::size_t pos = 0;
  const auto& s = resp.text;
  while (pos <= s.size() && phrases.size() < 2) {
    auto end = s.find('\n', pos);
    if (end == std::string::npos) end = s.size();
    auto line = strip_quotes(strip_list_marker(s.substr(pos, end - pos)));
    if (text::starts_with_ci(line, "fact:")) line.clear();
    line = text::normalize_ws(line);
    if (!line.empty()) phrases.push_back(std::move(line));
    pos = end + 1;
  }
  while (phrases.size() < 2) phrases.push_back(fact.text);
  return phrases;
}

LoopResult verify_edit_loop(const AtomicFact& fact, const retrieval::Retriever& retriever, LlmClient& llm,
                            CounterSink* counters, const LoopOptions& options) {
  if (options.max_iterations < 1) throw PreconditionError("max_iterations must be at least 1");
  LoopResult r;
  r.fact = fact;
  r.trail.fact = {fact.clause_index, fact.fact_index};
  r.trail.terminal = TrailTerminal::ExhaustedIterations;

  try {
    r.evidence = retriever.retrieve_evidence(r.fact, std::nullopt, counters);
  } catch (const NoEvidence&) {
    r.evidence.reset();
  }

  for (int it = 0; it < options.max_iterations; ++it) {
    const bool last = it + 1 == options.max_iterations;
    TrailStep step;
    step.iteration = it;
    step.evidence = r.evidence;
    step.status = r.evidence ? verify(r.fact, *r.evidence, llm) : VerificationStatus::Irrelevant;

    if (step.status == VerificationStatus::Supportive) {
      r.trail.steps.push_back(std::move(step));
      r.trail.terminal = TrailTerminal::Resolved;
      break;
    }

    if (step.status == VerificationStatus::EditingRequired) {
      if (!options.allow_edit) {
        r.trail.steps.push_back(std::move(step));
        break;
      }
      try {
        r.fact = edit_fact(r.fact, *r.evidence, llm, &r.warnings);
        step.action = LoopAction::Edited;
      } catch (const EmptyEdit&) {
        r.warnings.push_back("EmptyEdit: fact (" + std::to_string(fact.clause_index) + "," +
                             std::to_string(fact.fact_index) + ") kept unchanged");
      }
      r.trail.steps.push_back(std::move(step));
      continue;
    }

    // Irrelevant, or nothing retrieved.
    if (!options.allow_reretrieval) {
      r.trail.steps.push_back(std::move(step));
      break;
    }
    if (!last) {
      step.action = LoopAction::ExpandedAndReretrieved;
      for (const auto& phrase : expand_fact(r.fact, llm)) {
        try {
          r.evidence = retriever.retrieve_evidence(r.fact, phrase, counters);
          break;
        } catch (const NoEvidence&) {
        }
      }
    }
    r.trail.steps.push_back(std::move(step));
  }
  r.trail.final_evidence = r.evidence;
  return r;
}

}  // namespace are::verify_edit
