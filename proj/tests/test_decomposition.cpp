#include "doctest.h"

#include "are/decomposition.hpp"
#include "are/errors.hpp"
#include "are/mock_providers.hpp"
#include "are/text.hpp"

using namespace are;
using namespace are::decomposition;

namespace {

const std::string kBrady =
    "The player with the most Super Bowl rings is Tom Brady. Tom Brady is an American football quarterback who has "
    "won six Super Bowl championships.";

const std::string kBradyJson =
    R"({"output":[{"The player with the most Super Bowl rings is Tom Brady.":["The player with the most Super Bowl rings is Tom Brady."]},)"
    R"({"Tom Brady is an American football quarterback who has won six Super Bowl championships.":["Tom Brady is an American football quarterback.","Tom Brady has won six Super Bowl championships."]}]})";

}  // namespace

TEST_CASE("generate_answer") {
  SUBCASE("scripted few-shot reply yields the explanation") {
    ScriptedChat chat({"1.Question: Player with most Super Bowl rings?\n2.Explanation: " + kBrady +
                       "\n3.Answer: Tom Brady."});
    CounterSink counters;
    LlmClient llm(chat, &counters);
    const auto x = generate_answer({"q1", "Player with most Super Bowl rings?", std::nullopt}, llm);
    CHECK(x.text() == kBrady);
    CHECK(counters.snapshot().llm_interactions == 1);
    CHECK(chat.requests()[0].user_prompt.find("Player with most Super Bowl rings?") != std::string::npos);
  }
  SUBCASE("plain reply is used verbatim") {
    ScriptedChat chat({kBrady});
    LlmClient llm(chat);
    CHECK(generate_answer({"q1", "q?", std::nullopt}, llm).text() == kBrady);
  }
  SUBCASE("blank twice is EmptyGeneration") {
    ScriptedChat chat({"  ", "\n\t"});
    LlmClient llm(chat);
    CHECK_THROWS_AS(generate_answer({"q1", "q?", std::nullopt}, llm), EmptyGeneration);
    CHECK(chat.remaining() == 0);
  }
  SUBCASE("blank once is retried") {
    ScriptedChat chat({" ", "Answer: Jane Austen."});
    LlmClient llm(chat);
    CHECK(generate_answer({"q1", "q?", std::nullopt}, llm).text() == "Jane Austen.");
  }
}

TEST_CASE("extract_answer_text") {
  CHECK(extract_answer_text("1.Question: q\n2.Explanation: E text.\n3.Answer: A.") == "E text.");
  CHECK(extract_answer_text("Answer: only this.") == "only this.");
  CHECK(extract_answer_text("  free   text ") == "free text");
}

TEST_CASE("decompose") {
  SUBCASE("worked example") {
    ScriptedChat chat({kBradyJson});
    LlmClient llm(chat);
    const auto d = decompose(LongFormAnswer(kBrady), llm);
    CHECK(validate_decomposition(d).empty());
    REQUIRE(d.clauses.size() == 2);
    CHECK(d.clauses[0].atomic_facts.size() == 1);
    REQUIRE(d.clauses[1].atomic_facts.size() == 2);
    CHECK(d.clauses[1].atomic_facts[0].text == "Tom Brady is an American football quarterback.");
    CHECK(d.clauses[1].atomic_facts[1].text == "Tom Brady has won six Super Bowl championships.");
    for (const auto& c : d.clauses) {
      for (const auto& f : c.atomic_facts) CHECK_FALSE(f.edited);
    }
  }
  SUBCASE("single sentence, single fact") {
    ScriptedChat chat({R"({"output":[{"Tom Brady plays American football.":["Tom Brady plays American football."]}]})"});
    LlmClient llm(chat);
    const auto d = decompose(LongFormAnswer("Tom Brady plays American football."), llm);
    REQUIRE(d.clauses.size() == 1);
    REQUIRE(d.clauses[0].atomic_facts.size() == 1);
    CHECK(d.clauses[0].atomic_facts[0].text == "Tom Brady plays American football.");
  }
  SUBCASE("malformed twice falls back to sentence split") {
    ScriptedChat chat({"not json", "{\"output\": ["});
    LlmClient llm(chat);
    std::vector<std::string> warnings;
    const auto d = decompose(LongFormAnswer(kBrady), llm, &warnings);
    CHECK(validate_decomposition(d).empty());
    REQUIRE(d.clauses.size() == 2);
    for (const auto& c : d.clauses) {
      REQUIRE(c.atomic_facts.size() == 1);
      CHECK(c.atomic_facts[0].text == c.text);
    }
    CHECK(warnings.size() == 1);
    // The repair prompt carries the parser's complaint.
    CHECK(chat.requests()[1].user_prompt.find("not json") != std::string::npos);
    CHECK(chat.requests()[1].task == "decompose+json_repair");
  }
  SUBCASE("repair succeeds on the second try") {
    ScriptedChat chat({"Sure! Here you go", kBradyJson});
    LlmClient llm(chat);
    std::vector<std::string> warnings;
    const auto d = decompose(LongFormAnswer(kBrady), llm, &warnings);
    CHECK(d.fact_count() == 3);
    CHECK(warnings.empty());
  }
  SUBCASE("empty answer") {
    ScriptedChat chat({});
    LlmClient llm(chat);
    CHECK_THROWS_AS(decompose(LongFormAnswer(" "), llm), PreconditionError);
  }
}

TEST_CASE("parse_decomposition_json") {
  SUBCASE("labelled keys map to clauses in order") {
    const LongFormAnswer x("A and B. C.");
    const auto d = parse_decomposition_json(R"({"output":[{"MF1":["A","B"]},{"MF2":["C"]}]})", x);
    REQUIRE(d.clauses.size() == 2);
    CHECK(d.clauses[0].atomic_facts.size() == 2);
    CHECK(d.clauses[0].atomic_facts[0].text == "A");
    CHECK(d.clauses[0].atomic_facts[1].text == "B");
    CHECK(d.clauses[1].atomic_facts[0].text == "C");
    CHECK(d.clauses[0].text == "A and B.");
    CHECK(d.clauses[1].text == "C.");
    CHECK(d.clauses[1].atomic_facts[0].clause_index == 2);
    CHECK(d.clauses[1].atomic_facts[0].fact_index == 1);
  }
  SUBCASE("empty output is rejected") {
    CHECK_THROWS_AS(parse_decomposition_json(R"({"output":[]})", LongFormAnswer("x")), ParseError);
  }
  SUBCASE("labels out of order are sorted numerically") {
    const LongFormAnswer x("First. Second. Third.");
    const auto d =
        parse_decomposition_json(R"({"output":[{"MF10":["t"]},{"MF2":["s"]},{"MF_1":["f"]}]})", LongFormAnswer("x"));
    REQUIRE(d.clauses.size() == 3);
    CHECK(d.clauses[0].atomic_facts[0].text == "f");
    CHECK(d.clauses[1].atomic_facts[0].text == "s");
    CHECK(d.clauses[2].atomic_facts[0].text == "t");
    const auto d2 = parse_decomposition_json(R"({"output":[{"MF2":["s"]},{"MF1":["f"]},{"MF3":["t"]}]})", x);
    CHECK(d2.clauses[0].text == "First.");
    CHECK(d2.clauses[0].atomic_facts[0].text == "f");
    CHECK(d2.clauses[1].text == "Second.");
  }
  SUBCASE("equal labels keep appearance order") {
    const auto d = parse_decomposition_json(R"({"output":[{"MF1":["a"]},{"MF1":["b"]}]})", LongFormAnswer("x"));
    CHECK(d.clauses[0].atomic_facts[0].text == "a");
    CHECK(d.clauses[1].atomic_facts[0].text == "b");
  }
  SUBCASE("structural errors") {
    const LongFormAnswer x("x");
    CHECK_THROWS_AS(parse_decomposition_json("[1,2]", x), ParseError);
    CHECK_THROWS_AS(parse_decomposition_json(R"({"result":[]})", x), ParseError);
    CHECK_THROWS_AS(parse_decomposition_json(R"({"output":{}})", x), ParseError);
    CHECK_THROWS_AS(parse_decomposition_json(R"({"output":[{"MF1":[]}]})", x), ParseError);
    CHECK_THROWS_AS(parse_decomposition_json("no braces", x), ParseError);
  }
  SUBCASE("prose around the JSON is tolerated") {
    const auto d = parse_decomposition_json("Here it is: " + kBradyJson + " Hope this helps.", LongFormAnswer(kBrady));
    CHECK(d.fact_count() == 3);
  }
  SUBCASE("parse, serialize, parse is a fixed point") {
    const LongFormAnswer x(kBrady);
    const auto d1 = parse_decomposition_json(kBradyJson, x);
    const auto s1 = serialize_decomposition_json(d1);
    const auto d2 = parse_decomposition_json(s1, x);
    CHECK(d1 == d2);
    CHECK(serialize_decomposition_json(d2) == s1);
  }
}

TEST_CASE("sentence_split_fallback") {
  const LongFormAnswer x("One thing.  Another thing? A third!");
  const auto d = sentence_split_fallback(x);
  CHECK(validate_decomposition(d).empty());
  REQUIRE(d.clauses.size() == 3);
  std::vector<std::string> texts;
  for (const auto& c : d.clauses) {
    CHECK(c.atomic_facts.size() == 1);
    texts.push_back(c.text);
  }
  CHECK(text::join(texts, " ") == text::normalize_ws(x.text()));
}

TEST_CASE("consistency score") {
  CHECK(count_consistency(3, 3) == 1.0);
  CHECK(count_consistency(2, 4) == 0.5);
  CHECK(count_consistency(4, 2) == 0.5);
  // For a fixed gold count, moving the prediction away never raises the score.
  for (std::size_t gold = 1; gold <= 10; ++gold) {
    for (std::size_t p = 1; p <= 10; ++p) {
      const double s = count_consistency(p, gold);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
      if (p < gold) CHECK(s <= count_consistency(p + 1, gold));
      if (p > gold) CHECK(s <= count_consistency(p - 1, gold));
    }
  }
  const auto pred = sentence_split_fallback(LongFormAnswer("A. B."));
  const auto gold = sentence_split_fallback(LongFormAnswer("A. B. C. D."));
  const auto s = consistency_score(pred, gold);
  CHECK(s.molecular == 0.5);
  CHECK(s.atomic == 0.5);
}

TEST_CASE("correctness score") {
  OverlapNli judge;
  SUBCASE("substring facts are all correct") {
    ScriptedChat chat({kBradyJson});
    LlmClient llm(chat);
    const auto d = decompose(LongFormAnswer(kBrady), llm);
    // Clause texts are verbatim, AF_11 is verbatim; AF_21 and AF_22 share every word with X.
    const auto s = correctness_score(d, judge);
    CHECK(s.molecular == 1.0);
    CHECK(s.atomic == 1.0);
  }
  SUBCASE("one of four facts contradicts") {
    AnswerDecomposition d;
    d.answer = LongFormAnswer("Ann is a doctor. Ann lives in Oslo. Ann has two cats. Ann likes tea.");
    d.clauses.push_back({1, "Ann is a doctor.", {AtomicFact::make(1, 1, "Ann is a doctor.")}});
    d.clauses.push_back({2, "Ann lives in Oslo.", {AtomicFact::make(2, 1, "Ann lives in Oslo.")}});
    d.clauses.push_back({3, "Ann has two cats.", {AtomicFact::make(3, 1, "Ann has three dogs.")}});
    d.clauses.push_back({4, "Ann likes tea.", {AtomicFact::make(4, 1, "Ann likes tea.")}});
    const auto s = correctness_score(d, judge);
    CHECK(s.atomic == 0.75);
    CHECK(s.molecular == 1.0);
  }
  SUBCASE("judge without fixtures surfaces the provider error") {
    FixtureNli empty({}, false);
    CHECK_THROWS_AS(correctness_score(sentence_split_fallback(LongFormAnswer("A.")), empty), FixtureMiss);
  }
}
