#include "doctest.h"

#include "are/domain.hpp"
#include "are/errors.hpp"
#include "are/text.hpp"

using namespace are;

namespace {

AnswerDecomposition two_clauses() {
  AnswerDecomposition d;
  d.answer = LongFormAnswer("A is B. C is D and E.");
  d.clauses.push_back({1, "A is B.", {AtomicFact::make(1, 1, "A is B.")}});
  d.clauses.push_back({2, "C is D and E.", {AtomicFact::make(2, 1, "C is D."), AtomicFact::make(2, 2, "C is E.")}});
  return d;
}

template <class T>
T round_trip(const T& v) {
  return Json::parse(Json(v).dump()).get<T>();
}

}  // namespace

TEST_CASE("split_words keeps punctuation attached and splits on unicode spaces") {
  CHECK(text::split_words("  Tom  Brady, quarterback.\n") == std::vector<std::string>{"Tom", "Brady,", "quarterback."});
  CHECK(text::split_words("a b　c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(text::split_words("").empty());
}

TEST_CASE("normalize_ws collapses runs and trims") {
  CHECK(text::normalize_ws("  a \t b\n\nc  ") == "a b c");
  CHECK(text::normalize_ws("") == "");
}

TEST_CASE("split_sentences round-trips to the normalized text") {
  const std::string s = "One is here.  Two? Three!   Four";
  const auto parts = text::split_sentences(s);
  CHECK(parts == std::vector<std::string>{"One is here.", "Two?", "Three!", "Four"});
  CHECK(text::join(parts, " ") == text::normalize_ws(s));
}

TEST_CASE("content_words lower-cases and strips edge punctuation") {
  CHECK(text::content_words("\"Tom Brady,\" (QB).") == std::vector<std::string>{"tom", "brady", "qb"});
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(text::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("LongFormAnswer tokenization round-trips") {
  const LongFormAnswer x("  The player  is Tom Brady. ");
  CHECK(text::join(x.tokens(), " ") == text::normalize_ws(x.text()));
  CHECK(x.tokens().size() == 5);
  CHECK(LongFormAnswer("   ").empty());
}

TEST_CASE("validate_decomposition") {
  SUBCASE("well-formed two-clause decomposition") { CHECK(validate_decomposition(two_clauses()).empty()); }

  SUBCASE("clause without atomic facts") {
    auto d = two_clauses();
    d.clauses[1].atomic_facts.clear();
    CHECK(validate_decomposition(d) == std::vector<std::string>{"clause 2 has no atomic facts"});
  }

  SUBCASE("duplicate fact index") {
    auto d = two_clauses();
    d.clauses[0].atomic_facts.push_back(AtomicFact::make(1, 1, "A is also B."));
    const auto v = validate_decomposition(d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("duplicate") != std::string::npos);
  }

  SUBCASE("no clauses") { CHECK_FALSE(validate_decomposition(AnswerDecomposition{}).empty()); }

  SUBCASE("non-contiguous clause indices") {
    auto d = two_clauses();
    d.clauses[1].index = 3;
    for (auto& f : d.clauses[1].atomic_facts) f.clause_index = 3;
    CHECK_FALSE(validate_decomposition(d).empty());
  }

  SUBCASE("fact owned by the wrong clause") {
    auto d = two_clauses();
    d.clauses[1].atomic_facts[0].clause_index = 1;
    CHECK_FALSE(validate_decomposition(d).empty());
  }

  SUBCASE("unedited fact whose text drifted") {
    auto d = two_clauses();
    d.clauses[0].atomic_facts[0].text = "changed";
    CHECK_FALSE(validate_decomposition(d).empty());
  }

  SUBCASE("pure") {
    auto d = two_clauses();
    d.clauses[0].atomic_facts.clear();
    CHECK(validate_decomposition(d) == validate_decomposition(d));
  }
}

TEST_CASE("validate_trail enforces the length bound and supportive-last") {
  VerificationTrail t;
  t.fact = {1, 1};
  for (int i = 0; i < 4; ++i) t.steps.push_back({i, VerificationStatus::Irrelevant, LoopAction::None, std::nullopt});
  CHECK(validate_trail(t, 4).empty());
  CHECK_FALSE(validate_trail(t, 3).empty());
  t.steps[1].status = VerificationStatus::Supportive;
  CHECK_FALSE(validate_trail(t, 4).empty());
}

TEST_CASE("enum names round-trip") {
  for (auto s : {VerificationStatus::Supportive, VerificationStatus::EditingRequired, VerificationStatus::Irrelevant}) {
    CHECK(status_from_string(to_string(s)) == s);
  }
  for (auto a : {LoopAction::None, LoopAction::Edited, LoopAction::ExpandedAndReretrieved}) {
    CHECK(action_from_string(to_string(a)) == a);
  }
  for (auto t : {TrailTerminal::Resolved, TrailTerminal::ExhaustedIterations}) {
    CHECK(terminal_from_string(to_string(t)) == t);
  }
  CHECK_THROWS_AS(status_from_string("maybe"), InputError);
}

TEST_CASE("serialization round-trips for every type") {
  const Question q{"q7", "Who?", "nq"};
  CHECK(round_trip(q) == q);
  const Question q2{"q8", "Who?", std::nullopt};
  CHECK(round_trip(q2) == q2);

  const auto d = two_clauses();
  CHECK(round_trip(d) == d);
  CHECK(round_trip(d.clauses[1]) == d.clauses[1]);
  CHECK(round_trip(d.answer) == d.answer);

  AtomicFact edited = AtomicFact::make(2, 2, "C is F.");
  edited.edited = true;
  edited.original_text = "C is E.";
  CHECK(round_trip(edited) == edited);

  const EvidenceItem e{"snippet", "https://x", -0.25, "query"};
  CHECK(round_trip(e) == e);

  const EvidenceSet es{2, {"a", "b"}, {"u1", "u2"}, {true, false}};
  CHECK(round_trip(es) == es);

  VerificationTrail t;
  t.fact = {2, 1};
  t.steps.push_back({0, VerificationStatus::Irrelevant, LoopAction::ExpandedAndReretrieved, std::nullopt});
  t.steps.push_back({1, VerificationStatus::Supportive, LoopAction::None, e});
  t.terminal = TrailTerminal::Resolved;
  t.final_evidence = e;
  CHECK(round_trip(t) == t);

  const RunCounters c{3, 400, 5, 1.5};
  CHECK(round_trip(c) == c);

  const MetricsReport m{0.5, 0.25, std::nullopt, std::nullopt, std::nullopt};
  CHECK(round_trip(m) == m);
  const MetricsReport m2{0.5, 0.25, 0.9, 0.642857, 0.382979};
  CHECK(round_trip(m2) == m2);

  AttributionResult r;
  r.question = q;
  r.original = d.answer;
  r.revised = LongFormAnswer("A is B. C is D and F.");
  r.decomposition = d;
  r.revised_clauses = {"A is B.", "C is D and F."};
  r.report = {EvidenceSet{1, {"x"}, {"u"}, {true}}, es};
  r.trails = {t};
  r.counters = c;
  r.warnings = {"something degraded"};
  CHECK(round_trip(r) == r);
}

TEST_CASE("JSON field names are snake_case") {
  const Json j = AtomicFact::make(1, 2, "x");
  CHECK(j.contains("clause_index"));
  CHECK(j.contains("fact_index"));
  CHECK(j.contains("original_text"));
  const Json e = EvidenceItem{"s", "u", 0.1, "q"};
  CHECK(e.contains("source_url"));
  CHECK(e.contains("rank_score"));
  CHECK(e.contains("query_used"));
}
