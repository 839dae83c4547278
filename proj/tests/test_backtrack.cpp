#include "doctest.h"

#include "are/backtrack.hpp"
#include "are/errors.hpp"
#include "are/mock_providers.hpp"
#include "are/text.hpp"

using namespace are;
using namespace are::backtrack;

namespace {

const std::string kMf1 = "The player with the most Super Bowl rings is Tom Brady.";
const std::string kMf2 = "Tom Brady is an American football quarterback who has won six Super Bowl championships.";

AtomicFact edited(int i, int j, const std::string& from, const std::string& to) {
  auto f = AtomicFact::make(i, j, from);
  f.text = to;
  f.edited = true;
  return f;
}

AnswerDecomposition brady(bool with_edit) {
  AnswerDecomposition d;
  d.answer = LongFormAnswer(kMf1 + " " + kMf2);
  d.clauses.push_back({1, kMf1, {AtomicFact::make(1, 1, kMf1)}});
  MolecularClause c2{2, kMf2, {AtomicFact::make(2, 1, "Tom Brady is an American football quarterback.")}};
  if (with_edit) {
    c2.atomic_facts.push_back(edited(2, 2, "Tom Brady has won six Super Bowl championships.",
                                     "Tom Brady has won seven Super Bowl championships."));
  } else {
    c2.atomic_facts.push_back(AtomicFact::make(2, 2, "Tom Brady has won six Super Bowl championships."));
  }
  d.clauses.push_back(c2);
  return d;
}

VerificationTrail trail(int i, int j, const std::string& snippet, TrailTerminal terminal, const std::string& url = "u") {
  VerificationTrail t;
  t.fact = {i, j};
  t.terminal = terminal;
  EvidenceItem e{snippet, url, 0.5, "q"};
  t.steps.push_back({0, terminal == TrailTerminal::Resolved ? VerificationStatus::Supportive
                                                            : VerificationStatus::Irrelevant,
                     LoopAction::None, e});
  t.final_evidence = e;
  return t;
}

}  // namespace

TEST_CASE("backtrack") {
  SUBCASE("worked example: only the edited clause changes") {
    const auto d = brady(true);
    ScriptedChat chat({"Sentences: The player with the most Super Bowl rings is Tom Brady. Tom Brady is an American "
                       "football quarterback who has won seven Super Bowl championships."});
    LlmClient llm(chat);
    const auto r = backtrack::backtrack(d, llm);
    CHECK(r.answer.text() == kMf1 +
                                 " Tom Brady is an American football quarterback who has won seven Super Bowl "
                                 "championships.");
    CHECK(r.clause_texts[0] == kMf1);
    CHECK(r.provider_called);
    CHECK_FALSE(r.used_fallback);
    // The payload carries the reference answer and the current facts.
    const auto payload = Json::parse(chat.requests()[0].vars.at("payload").get<std::string>());
    CHECK(payload.at("reference answer") == d.answer.text());
    CHECK(payload.at("clauses").size() == 2);
  }
  SUBCASE("no edits: identity without a provider call") {
    const auto d = brady(false);
    ScriptedChat chat({});
    LlmClient llm(chat);
    const auto r = backtrack::backtrack(d, llm);
    CHECK(r.answer.text() == d.answer.text());
    CHECK_FALSE(r.provider_called);
    CHECK(chat.requests().empty());
  }
  SUBCASE("untouched clauses stay verbatim even when the model paraphrases them") {
    const auto d = brady(true);
    ScriptedChat chat({"Sentences: Tom Brady owns the most rings. He is a quarterback with seven titles."});
    LlmClient llm(chat);
    const auto r = backtrack::backtrack(d, llm);
    CHECK(r.clause_texts[0] == kMf1);
    CHECK(r.answer.text().find(kMf1) == 0);
    CHECK(r.clause_texts[1] == "He is a quarterback with seven titles.");
  }
  SUBCASE("every fact edited: every clause re-rendered, count preserved") {
    AnswerDecomposition d;
    d.answer = LongFormAnswer("A is 1. B is 2. C is 3.");
    d.clauses.push_back({1, "A is 1.", {edited(1, 1, "A is 1.", "A is 10.")}});
    d.clauses.push_back({2, "B is 2.", {edited(2, 1, "B is 2.", "B is 20.")}});
    d.clauses.push_back({3, "C is 3.", {edited(3, 1, "C is 3.", "C is 30.")}});
    ScriptedChat chat({"Sentences: A is 10. B is 20. C is 30."});
    LlmClient llm(chat);
    const auto r = backtrack::backtrack(d, llm);
    CHECK(r.clause_texts.size() == 3);
    CHECK(r.answer.text() == "A is 10. B is 20. C is 30.");
    CHECK(text::split_sentences(r.answer.text()).size() == 3);
  }
  SUBCASE("blank reply falls back to splicing") {
    const auto d = brady(true);
    ScriptedChat chat({"   "});
    LlmClient llm(chat);
    std::vector<std::string> warnings;
    const auto r = backtrack::backtrack(d, llm, &warnings);
    CHECK(r.used_fallback);
    CHECK(r.answer.text() == kMf1 +
                                 " Tom Brady is an American football quarterback who has won seven Super Bowl "
                                 "championships.");
    CHECK(warnings.size() == 1);
  }
  SUBCASE("EmptyGeneration from the provider falls back too") {
    const auto d = brady(true);
    FunctionChat chat([](const ChatRequest&) -> std::string { throw EmptyGeneration("blank"); });
    LlmClient llm(chat);
    const auto r = backtrack::backtrack(d, llm);
    CHECK(r.used_fallback);
    CHECK(r.answer.text().find("seven") != std::string::npos);
  }
  SUBCASE("sentence count mismatch falls back") {
    const auto d = brady(true);
    ScriptedChat chat({"Sentences: One sentence only."});
    LlmClient llm(chat);
    const auto r = backtrack::backtrack(d, llm);
    CHECK(r.used_fallback);
    CHECK(r.clause_texts[0] == kMf1);
    CHECK(r.clause_texts[1].find("seven") != std::string::npos);
  }
}

TEST_CASE("splice_clause") {
  SUBCASE("original text found verbatim") {
    MolecularClause c{1, "Ann is a doctor. Ann lives in Oslo.", {edited(1, 1, "Ann lives in Oslo.", "Ann lives in Bergen.")}};
    CHECK(splice_clause(c) == "Ann is a doctor. Ann lives in Bergen.");
  }
  SUBCASE("smallest differing word span") {
    MolecularClause c{1, kMf2,
                      {edited(1, 1, "Tom Brady has won six Super Bowl championships.",
                              "Tom Brady has won seven Super Bowl championships.")}};
    CHECK(splice_clause(c) ==
          "Tom Brady is an American football quarterback who has won seven Super Bowl championships.");
  }
  SUBCASE("unlocatable edit is appended") {
    MolecularClause c{1, "Ann is a doctor.", {edited(1, 1, "Ann owns a cat.", "Ann owns a dog.")}};
    CHECK(splice_clause(c) == "Ann is a doctor. Ann owns a dog.");
  }
  SUBCASE("no edits leaves the clause alone") {
    MolecularClause c{1, "Ann is a doctor.", {AtomicFact::make(1, 1, "Ann is a doctor.")}};
    CHECK(splice_clause(c) == "Ann is a doctor.");
  }
}

TEST_CASE("extract_sentences") {
  CHECK(extract_sentences("Thinking...\nSentences:  A.  B.") == "A. B.");
  CHECK(extract_sentences("No marker here.") == "No marker here.");
}

TEST_CASE("reassemble keeps X's spacing outside replaced clauses") {
  AnswerDecomposition d;
  d.answer = LongFormAnswer("A is 1.  B is 2.\nC is 3.");
  d.clauses = {{1, "A is 1.", {AtomicFact::make(1, 1, "A is 1.")}},
               {2, "B is 2.", {AtomicFact::make(2, 1, "B is 2.")}},
               {3, "C is 3.", {AtomicFact::make(3, 1, "C is 3.")}}};
  CHECK(reassemble(d, {"A is 1.", "B is 20.", "C is 3."}) == "A is 1.  B is 20.\nC is 3.");
  d.clauses[1].text = "not in X";
  CHECK(reassemble(d, {"A is 1.", "B is 20.", "C is 3."}) == "A is 1. B is 20. C is 3.");
}

TEST_CASE("aggregate_evidence") {
  SUBCASE("identical snippets within a clause collapse") {
    const auto d = brady(false);
    const std::vector<VerificationTrail> ts = {trail(1, 1, "e1", TrailTerminal::Resolved),
                                               trail(2, 1, "same", TrailTerminal::Resolved),
                                               trail(2, 2, "same", TrailTerminal::Resolved)};
    const auto a = aggregate_evidence(ts, d);
    REQUIRE(a.size() == 2);
    CHECK(a[0].snippets == std::vector<std::string>{"e1"});
    CHECK(a[1].snippets == std::vector<std::string>{"same"});
  }
  SUBCASE("two clauses with distinct snippets are singletons") {
    const auto d = brady(false);
    const auto a = aggregate_evidence({trail(1, 1, "x", TrailTerminal::Resolved),
                                       trail(2, 1, "y", TrailTerminal::Resolved),
                                       trail(2, 2, "z", TrailTerminal::Resolved)},
                                      d);
    CHECK(a[0].snippets.size() == 1);
    CHECK(a[1].snippets == std::vector<std::string>{"y", "z"});
    CHECK(a[0].clause_index == 1);
    CHECK(a[1].clause_index == 2);
  }
  SUBCASE("whitespace variants are duplicates") {
    const auto d = brady(false);
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"a  b", "a b"}, {" a b", "a b "}, {"a\tb", "a\nb"}, {"a b", "a  b  "}};
    for (const auto& [p, q] : pairs) {
      const auto a = aggregate_evidence({trail(1, 1, "x", TrailTerminal::Resolved),
                                         trail(2, 1, p, TrailTerminal::Resolved),
                                         trail(2, 2, q, TrailTerminal::Resolved)},
                                        d);
      CHECK(a[1].snippets.size() == 1);
    }
    // Case differences are not duplicates.
    const auto a = aggregate_evidence({trail(1, 1, "x", TrailTerminal::Resolved),
                                       trail(2, 1, "A b", TrailTerminal::Resolved),
                                       trail(2, 2, "a b", TrailTerminal::Resolved)},
                                      d);
    CHECK(a[1].snippets.size() == 2);
  }
  SUBCASE("unsupported flags follow the terminal state") {
    const auto d = brady(false);
    const auto a = aggregate_evidence({trail(1, 1, "x", TrailTerminal::ExhaustedIterations),
                                       trail(2, 1, "s", TrailTerminal::Resolved),
                                       trail(2, 2, "s", TrailTerminal::ExhaustedIterations)},
                                      d);
    CHECK(a[0].supported == std::vector<bool>{false});
    CHECK(a[1].supported == std::vector<bool>{false});
    CHECK_FALSE(a[0].all_supported());
  }
  SUBCASE("facts without evidence contribute nothing, sets still exist") {
    const auto d = brady(false);
    auto t = trail(1, 1, "x", TrailTerminal::ExhaustedIterations);
    t.final_evidence.reset();
    const auto a = aggregate_evidence({t, trail(2, 1, "y", TrailTerminal::Resolved), trail(2, 2, "z", TrailTerminal::Resolved)}, d);
    REQUIRE(a.size() == 2);
    CHECK(a[0].snippets.empty());
  }
  SUBCASE("idempotent and ordered by fact index regardless of trail order") {
    const auto d = brady(false);
    const std::vector<VerificationTrail> ts = {trail(2, 2, "z", TrailTerminal::Resolved),
                                               trail(1, 1, "x", TrailTerminal::Resolved),
                                               trail(2, 1, "y", TrailTerminal::Resolved)};
    const auto a = aggregate_evidence(ts, d);
    CHECK(a == aggregate_evidence(ts, d));
    CHECK(a[1].snippets == std::vector<std::string>{"y", "z"});
  }
  SUBCASE("missing trail") {
    CHECK_THROWS_AS(aggregate_evidence({trail(1, 1, "x", TrailTerminal::Resolved)}, brady(false)), PreconditionError);
  }
}

TEST_CASE("attribution_report_json") {
  const auto d = brady(true);
  const std::vector<EvidenceSet> report = {{1, {"e1"}, {"u1"}, {true}}, {2, {"e2", "e3"}, {"u2", "u3"}, {true, false}}};
  const auto j = attribution_report_json(d, {kMf1, "revised"}, report);
  REQUIRE(j.at("clauses").size() == 2);
  const auto& c2 = j["clauses"][1];
  CHECK(c2.at("index") == 2);
  CHECK(c2.at("text") == kMf2);
  CHECK(c2.at("revised_text") == "revised");
  CHECK(c2.at("evidence")[1].at("snippet") == "e3");
  CHECK(c2.at("evidence")[1].at("url") == "u3");
  CHECK(c2.at("evidence")[1].at("supported") == false);
}
