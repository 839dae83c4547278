#include "are/backtrack.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are::backtrack {

namespace {

bool clause_edited(const MolecularClause& c) {
  for (const auto& f : c.atomic_facts) {
    if (f.edited && f.text != f.original_text) return true;
  }
  return false;
}

// Positions where `needle` occurs as a contiguous word run in `hay`.
std::vector<std::size_t> find_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  std::vector<std::size_t> hits;
  if (needle.empty() || needle.size() > hay.size()) return hits;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) hits.push_back(i);
  }
  return hits;
}

std::optional<std::string> splice_word_diff(const std::string& clause, const AtomicFact& f) {
  const auto a = text::split_words(f.original_text);
  const auto b = text::split_words(f.text);
  std::size_t p = 0;
  while (p < a.size() && p < b.size() && a[p] == b[p]) ++p;
  std::size_t s = 0;
  while (s < a.size() - p && s < b.size() - p && a[a.size() - 1 - s] == b[b.size() - 1 - s]) ++s;
  const std::vector<std::string> old_span(a.begin() + static_cast<std::ptrdiff_t>(p),
                                          a.end() - static_cast<std::ptrdiff_t>(s));
  const std::vector<std::string> new_span(b.begin() + static_cast<std::ptrdiff_t>(p),
                                          b.end() - static_cast<std::ptrdiff_t>(s));
  auto words = text::split_words(clause);
  const auto hits = find_run(words, old_span);
  if (hits.size() != 1) return std::nullopt;
  const auto at = words.begin() + static_cast<std::ptrdiff_t>(hits.front());
  words.erase(at, at + static_cast<std::ptrdiff_t>(old_span.size()));
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(hits.front()), new_span.begin(), new_span.end());
  return text::join(words, " ");
}

}  // namespace

std::string backtrack_payload(const AnswerDecomposition& d) {
  nlohmann::ordered_json clauses = nlohmann::ordered_json::array();
  for (const auto& c : d.clauses) {
    std::vector<std::string> facts;
    for (const auto& f : c.atomic_facts) facts.push_back(f.text);
    clauses.push_back({{"Molecular clause " + std::to_string(c.index), facts}});
  }
  nlohmann::ordered_json payload;
  payload["reference answer"] = d.answer.text();
  payload["clauses"] = clauses;
  return payload.dump();
}

std::string extract_sentences(std::string_view reply) {
  const auto folded = text::casefold(reply);
  const auto pos = folded.rfind("sentences:");
  if (pos == std::string::npos) return text::normalize_ws(reply);
  return text::normalize_ws(reply.substr(pos + 10));
}

std::string splice_clause(const MolecularClause& clause) {
  std::string out = clause.text;
  for (const auto& f : clause.atomic_facts) {
    if (!f.edited || f.text == f.original_text) continue;
    if (out.find(f.original_text) != std::string::npos) {
      out = text::replace_all(out, f.original_text, f.text);
    } else if (auto spliced = splice_word_diff(out, f)) {
      out = *spliced;
    } else {
      out = text::normalize_ws(out + " " + f.text);
    }
  }
  return out;
}

std::string reassemble(const AnswerDecomposition& d, const std::vector<std::string>& clause_texts) {
  std::string out = d.answer.text();
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < d.clauses.size(); ++i) {
    const auto& original = d.clauses[i].text;
    const auto at = out.find(original, cursor);
    if (at == std::string::npos) return text::join(clause_texts, " ");
    out.replace(at, original.size(), clause_texts[i]);
    cursor = at + clause_texts[i].size();
  }
  return out;
}

BacktrackResult backtrack(const AnswerDecomposition& d, LlmClient& llm, std::vector<std::string>* warnings) {
  BacktrackResult r;
  for (const auto& c : d.clauses) r.clause_texts.push_back(c.text);
  bool any = false;
  for (const auto& c : d.clauses) any = any || clause_edited(c);
  if (!any) {
    r.answer = d.answer;
    return r;
  }

  r.provider_called = true;
  std::string body;
  try {
    body = extract_sentences(llm.complete("backtrack", {{"payload", backtrack_payload(d)}}).text);
  } catch (const EmptyGeneration&) {
    body.clear();
  }
  const auto sentences = text::split_sentences(body);
  if (!body.empty() && sentences.size() == d.clauses.size()) {
    for (std::size_t i = 0; i < d.clauses.size(); ++i) {
      if (clause_edited(d.clauses[i])) r.clause_texts[i] = sentences[i];
    }
  } else {
    r.used_fallback = true;
    if (warnings != nullptr) {
      warnings->push_back(body.empty() ? "EmptyGeneration: backtracking reply was blank, spliced edits instead"
                                       : "backtracking reply had " + std::to_string(sentences.size()) +
                                             " sentences for " + std::to_string(d.clauses.size()) +
                                             " clauses, spliced edits instead");
    }
    for (std::size_t i = 0; i < d.clauses.size(); ++i) {
      if (clause_edited(d.clauses[i])) r.clause_texts[i] = splice_clause(d.clauses[i]);
    }
  }
  r.answer = LongFormAnswer(reassemble(d, r.clause_texts));
  return r;
}

std::vector<EvidenceSet> aggregate_evidence(const std::vector<VerificationTrail>& trails,
                                            const AnswerDecomposition& d) {
  std::map<FactRef, const VerificationTrail*> by_ref;
  for (const auto& t : trails) by_ref[t.fact] = &t;

  std::vector<EvidenceSet> out;
  for (const auto& c : d.clauses) {
    EvidenceSet set;
    set.clause_index = c.index;
    std::map<std::string, std::size_t> seen;
    for (const auto& f : c.atomic_facts) {
      const auto it = by_ref.find({f.clause_index, f.fact_index});
      if (it == by_ref.end()) {
        throw PreconditionError("no trail for fact (" + std::to_string(f.clause_index) + "," +
                                std::to_string(f.fact_index) + ")");
      }
      const auto& trail = *it->second;
      if (!trail.final_evidence) continue;
      const bool resolved = trail.terminal == TrailTerminal::Resolved;
      const auto key = text::normalize_ws(trail.final_evidence->snippet);
      if (key.empty()) continue;
      if (const auto dup = seen.find(key); dup != seen.end()) {
        set.supported[dup->second] = set.supported[dup->second] && resolved;
        continue;
      }
      seen.emplace(key, set.snippets.size());
      set.snippets.push_back(text::trim(trail.final_evidence->snippet));
      set.sources.push_back(trail.final_evidence->source_url);
      set.supported.push_back(resolved);
    }
    out.push_back(std::move(set));
  }
  return out;
}

Json attribution_report_json(const AnswerDecomposition& d, const std::vector<std::string>& revised_clauses,
                             const std::vector<EvidenceSet>& report) {
  Json clauses = Json::array();
  for (std::size_t i = 0; i < d.clauses.size(); ++i) {
    Json evidence = Json::array();
    if (i < report.size()) {
      const auto& e = report[i];
      for (std::size_t k = 0; k < e.snippets.size(); ++k) {
        evidence.push_back({{"snippet", e.snippets[k]},
                            {"url", k < e.sources.size() ? e.sources[k] : ""},
                            {"supported", k < e.supported.size() && e.supported[k]}});
      }
    }
    clauses.push_back({{"index", d.clauses[i].index},
                       {"text", d.clauses[i].text},
                       {"revised_text", i < revised_clauses.size() ? revised_clauses[i] : d.clauses[i].text},
                       {"evidence", evidence}});
  }
  return Json{{"clauses", clauses}};
}

}  // namespace are::backtrack
