#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "are/errors.hpp"
#include "are/metrics.hpp"
#include "are/mock_providers.hpp"

using namespace are;
using namespace are::metrics;

namespace {

using Words = std::vector<std::string>;

AnswerDecomposition clauses_of(const std::vector<std::string>& texts) {
  AnswerDecomposition d;
  std::string joined;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const int idx = static_cast<int>(i) + 1;
    d.clauses.push_back({idx, texts[i], {AtomicFact::make(idx, 1, texts[i])}});
    joined += (i ? " " : "") + texts[i];
  }
  d.answer = LongFormAnswer(joined);
  return d;
}

EvidenceSet set_of(int clause, std::vector<std::string> snippets) {
  EvidenceSet e;
  e.clause_index = clause;
  e.sources.assign(snippets.size(), "u");
  e.supported.assign(snippets.size(), true);
  e.snippets = std::move(snippets);
  return e;
}

}  // namespace

TEST_CASE("edit_distance") {
  CHECK(edit_distance(Words{"a", "b"}, Words{"a", "b"}) == 0);
  CHECK(edit_distance(Words{"the", "cat", "sat"}, Words{"the", "dog", "sat"}) == 1);
  CHECK(edit_distance(Words{"a", "b", "c"}, Words{}) == 3);
  CHECK(edit_distance(Words{}, Words{"a"}) == 1);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(0, 8);
  std::uniform_int_distribution<int> sym(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    Words a, b;
    for (int i = len(rng); i > 0; --i) a.push_back(std::string(1, static_cast<char>('a' + sym(rng))));
    for (int i = len(rng); i > 0; --i) b.push_back(std::string(1, static_cast<char>('a' + sym(rng))));
    CHECK(edit_distance(a, b) == oracle::levenshtein(a, b));
  }
}

TEST_CASE("preservation") {
  SUBCASE("identity") {
    const LongFormAnswer x("Tom Brady won seven rings.");
    CHECK(preservation(x, x) == 1.0);
  }
  SUBCASE("disjoint vocabulary of equal length") {
    CHECK(preservation(LongFormAnswer("a b c d"), LongFormAnswer("w x y z")) == 0.0);
  }
  SUBCASE("one substitution in three tokens") {
    const LongFormAnswer x("the cat sat");
    const LongFormAnswer y("the dog sat");
    CHECK(std::abs(preservation(x, y) - 2.0 / 3.0) < 1e-9);
    const double lev = static_cast<double>(oracle::levenshtein(x.tokens(), y.tokens()));
    CHECK(preservation(x, y) == doctest::Approx(1.0 - lev / 3.0));
  }
  SUBCASE("clamped at zero for a much longer revision") {
    CHECK(preservation(LongFormAnswer("a"), LongFormAnswer("b c d e")) == 0.0);
  }
  SUBCASE("character level") {
    CHECK(char_tokens("a  b") == Words{"a", " ", "b"});
    CHECK(char_tokens("\xC3\xA9t\xC3\xA9").size() == 3);
    CHECK(std::abs(preservation(LongFormAnswer("cat"), LongFormAnswer("cut"), Granularity::Character) - 2.0 / 3.0) <
          1e-9);
  }
  SUBCASE("empty original") {
    CHECK_THROWS_AS(preservation(LongFormAnswer(" "), LongFormAnswer("x")), PreconditionError);
  }
}

TEST_CASE("attr_r") {
  SUBCASE("single clause takes its best score") {
    const auto d = clauses_of({"C one."});
    FixtureNli nli({{"e1", "C one.", {0.9, false}}}, false);
    CHECK(attr_r(d, {set_of(1, {"e1"})}, nli) == doctest::Approx(0.9));
  }
  SUBCASE("average of per-clause maxima over all sets") {
    const auto d = clauses_of({"C one.", "C two."});
    FixtureNli nli({{"e1", "C one.", {0.8, false}},
                    {"e1", "C two.", {0.6, false}},
                    {"e2", "C one.", {0.1, false}},
                    {"e2", "C two.", {0.2, false}}},
                   false);
    CHECK(attr_r(d, {set_of(1, {"e1"}), set_of(2, {"e2"})}, nli) == doctest::Approx(0.7));
  }
  SUBCASE("containing evidence scores 1 under overlap") {
    OverlapNli nli;
    const auto d = clauses_of({"Tom Brady won seven rings."});
    CHECK(attr_r(d, {set_of(1, {"Before. Tom Brady won seven rings. After."})}, nli) == 1.0);
  }
  SUBCASE("premise is the snippets joined by single spaces") {
    CHECK(premise_of(set_of(1, {"a b", "c"})) == "a b c");
  }
  SUBCASE("empty report") {
    OverlapNli nli;
    CHECK(attr_r(clauses_of({"x."}), {}, nli) == 0.0);
  }
  SUBCASE("adding a set never lowers the score") {
    OverlapNli nli;
    std::mt19937_64 rng(3);
    const Words vocab = {"tom", "brady", "won", "seven", "rings", "super", "bowl", "game", "team"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    auto sentence = [&](int n) {
      std::string s;
      for (int i = 0; i < n; ++i) s += (i ? " " : "") + vocab[pick(rng)];
      return s;
    };
    for (int trial = 0; trial < 100; ++trial) {
      const auto d = clauses_of({sentence(4), sentence(3)});
      std::vector<EvidenceSet> report = {set_of(1, {sentence(5)})};
      double prev = attr_r(d, report, nli);
      for (int k = 0; k < 4; ++k) {
        report.push_back(set_of(2, {sentence(5)}));
        const double next = attr_r(d, report, nli);
        CHECK(next >= prev);
        CHECK(next <= 1.0);
        prev = next;
      }
    }
  }
}

TEST_CASE("attr_p") {
  SUBCASE("three of four sets entail") {
    const auto d = clauses_of({"A.", "B.", "C.", "D."});
    FixtureNli nli({{"ea", "A.", {0.9, true}},
                    {"eb", "B.", {0.9, true}},
                    {"ec", "C.", {0.9, true}},
                    {"ed", "D.", {0.9, false}}},
                   false);
    CHECK(attr_p(d, {set_of(1, {"ea"}), set_of(2, {"eb"}), set_of(3, {"ec"}), set_of(4, {"ed"})}, nli) == 0.75);
  }
  SUBCASE("all sets entail") {
    OverlapNli nli;
    const auto d = clauses_of({"Ann is a doctor.", "Ann lives in Oslo."});
    CHECK(attr_p(d, {set_of(1, {"Ann is a doctor."}), set_of(2, {"Yes, Ann lives in Oslo."})}, nli) == 1.0);
  }
  SUBCASE("own set only: another clause's evidence does not count") {
    OverlapNli nli;
    const auto d = clauses_of({"Ann is a doctor.", "Ann lives in Oslo."});
    const std::vector<EvidenceSet> report = {set_of(1, {"Ann is a doctor. Ann lives in Oslo."}), set_of(2, {"x"})};
    CHECK(attr_p(d, report, nli) == 0.5);
    CHECK(attr_r(d, report, nli) == 1.0);
  }
  SUBCASE("fragmented evidence lifts attr_r but not attr_p") {
    OverlapNli nli;
    const auto d = clauses_of({"Tom Brady won seven Super Bowl rings."});
    const std::vector<EvidenceSet> report = {set_of(1, {"Tom Brady won titles.", "Seven Super Bowl games were played."})};
    const auto [prob, label] = oracle::overlap(premise_of(report[0]), d.clauses[0].text);
    CHECK_FALSE(label);
    CHECK(attr_r(d, report, nli) == doctest::Approx(prob));
    CHECK(attr_r(d, report, nli) >= 0.6);
    CHECK(attr_p(d, report, nli) == 0.0);
  }
  SUBCASE("empty report and misaligned report") {
    OverlapNli nli;
    const auto d = clauses_of({"A.", "B."});
    CHECK(attr_p(d, {}, nli) == 0.0);
    CHECK_THROWS_AS(attr_p(d, {set_of(1, {"A."})}, nli), PreconditionError);
  }
  SUBCASE("strict mode also checks each fact against its own snippet") {
    OverlapNli nli;
    auto d = clauses_of({"Ann is a doctor and lives in Oslo."});
    d.clauses[0].atomic_facts = {AtomicFact::make(1, 1, "Ann is a doctor."), AtomicFact::make(1, 2, "Ann lives in Oslo.")};
    const std::vector<EvidenceSet> report = {set_of(1, {"Ann is a doctor and lives in Oslo."})};
    auto trail = [](int j, const std::string& snippet) {
      VerificationTrail t;
      t.fact = {1, j};
      t.terminal = TrailTerminal::Resolved;
      t.final_evidence = EvidenceItem{snippet, "u", 0.5, "q"};
      t.steps.push_back({0, VerificationStatus::Supportive, LoopAction::None, t.final_evidence});
      return t;
    };
    CHECK(attr_p(d, report, nli) == 1.0);
    CHECK(attr_p_strict(d, report, {trail(1, "Ann is a doctor."), trail(2, "Ann lives in Oslo.")}, nli) == 1.0);
    CHECK(attr_p_strict(d, report, {trail(1, "Ann is a doctor."), trail(2, "Bob lives in Rome.")}, nli) == 0.0);
    CHECK(attr_p_strict(d, report, {trail(1, "Ann is a doctor.")}, nli) == 0.0);
  }
}

TEST_CASE("f1") {
  CHECK(f1(0.756, 0.910) == doctest::Approx(0.826).epsilon(0.001 / 0.826));
  CHECK(f1(0.4, 0.4) == doctest::Approx(0.4));
  CHECK(f1(0.0, 0.7) == 0.0);
  CHECK(f1(0.0, 0.0) == 0.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    const double h = f1(a, b);
    CHECK(h == doctest::Approx(oracle::harmonic(a, b)));
    CHECK(h == f1(b, a));
    CHECK(h >= std::min(a, b) - 1e-12);
    CHECK(h <= std::max(a, b) + 1e-12);
  }
}

TEST_CASE("evaluate") {
  OverlapNli nli;
  AttributionResult r;
  r.original = LongFormAnswer("Ann is a doctor. Ann lives in Oslo.");
  r.revised = r.original;
  r.decomposition = clauses_of({"Ann is a doctor.", "Ann lives in Oslo."});
  r.revised_clauses = {"Ann is a doctor.", "Ann lives in Oslo."};
  r.report = {set_of(1, {"Ann is a doctor."}), set_of(2, {"Ann lives in Oslo."})};

  SUBCASE("identity run") {
    const auto m = evaluate(r, nli);
    CHECK(m.pres == 1.0);
    CHECK(m.attr_p == 1.0);
    CHECK(m.attr_r == 1.0);
    CHECK(m.f1_pp == 1.0);
    CHECK(m.f1_rp == 1.0);
  }
  SUBCASE("empty report") {
    r.report.clear();
    const auto m = evaluate(r, nli);
    CHECK(m.attr_r == 0.0);
    CHECK(m.attr_p == 0.0);
    CHECK(m.f1_rp == 0.0);
    CHECK(m.f1_pp == 0.0);
  }
  SUBCASE("no revision stage leaves pres and f1 empty") {
    r.revision_ran = false;
    const auto m = evaluate(r, nli);
    CHECK_FALSE(m.pres.has_value());
    CHECK_FALSE(m.f1_rp.has_value());
    CHECK(format_metric(m.pres) == "-");
  }
  SUBCASE("scores the revised clause texts") {
    r.revised = LongFormAnswer("Ann is a doctor. Ann lives in Bergen.");
    r.revised_clauses[1] = "Ann lives in Bergen.";
    const auto m = evaluate(r, nli);
    CHECK(m.attr_p == 0.5);
    CHECK(*m.pres == doctest::Approx(1.0 - 1.0 / 8.0));
    CHECK(*m.f1_pp == doctest::Approx(oracle::harmonic(0.5, 1.0 - 1.0 / 8.0)));
  }
}

TEST_CASE("metrics CSV") {
  std::ostringstream out;
  MetricsReport a{0.5, 1.0, 1.0, 2.0 / 3.0, 1.0};
  MetricsReport b{1.0, 0.0, std::nullopt, std::nullopt, std::nullopt};
  write_metrics_csv(out, {{"q1", a}, {"q,2", b}});
  CHECK(out.str() ==
        "id,attr_r,attr_p,pres,f1_rp,f1_pp\n"
        "q1,0.500000,1.000000,1.000000,0.666667,1.000000\n"
        "\"q,2\",1.000000,0.000000,-,-,-\n"
        "mean,0.750000,0.500000,1.000000,0.666667,1.000000\n");
}
