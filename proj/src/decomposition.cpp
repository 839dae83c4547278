#include "are/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <regex>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are::decomposition {

namespace {

using OrderedJson = nlohmann::ordered_json;

std::optional<int> clause_label(const std::string& key) {
  static const std::regex label(R"(^\s*MF[_ ]?(\d+)\s*$)", std::regex::icase);
  std::smatch m;
  if (std::regex_match(key, m, label)) return std::stoi(m[1].str());
  return std::nullopt;
}

std::vector<std::string> facts_from(const OrderedJson& v, const std::string& clause) {
  std::vector<std::string> out;
  auto take = [&](const OrderedJson& item) {
    if (item.is_string()) {
      out.push_back(text::trim(item.get<std::string>()));
    } else if (item.is_object()) {
      for (const auto& [k, inner] : item.items()) {
        if (!inner.is_string()) throw ParseError("atomic fact under \"" + clause + "\" is not a string");
        out.push_back(text::trim(inner.get<std::string>()));
      }
    } else {
      throw ParseError("atomic fact under \"" + clause + "\" is not a string");
    }
  };
  if (v.is_array()) {
    for (const auto& item : v) take(item);
  } else {
    take(v);
  }
  for (const auto& f : out) {
    if (f.empty()) throw ParseError("clause \"" + clause + "\" has an empty atomic fact");
  }
  return out;
}

struct RawClause {
  std::string key;
  std::optional<int> label;
  std::vector<std::string> facts;
};

}  // namespace

std::string_view extract_json_object(std::string_view raw) {
  const auto b = raw.find('{');
  const auto e = raw.rfind('}');
  if (b == std::string_view::npos || e == std::string_view::npos || e < b) return {};
  return raw.substr(b, e - b + 1);
}

std::string extract_answer_text(std::string_view raw) {
  static const std::regex expl(R"((?:^|\n)\s*(?:2\s*\.\s*)?Explanation\s*:)", std::regex::icase);
  static const std::regex ans(R"((?:^|\n)\s*(?:3\s*\.\s*)?Answer\s*:)", std::regex::icase);
  const std::string s(raw);
  std::smatch me;
  std::smatch ma;
  const bool has_e = std::regex_search(s, me, expl);
  const bool has_a = std::regex_search(s, ma, ans);
  if (has_e) {
    const auto start = static_cast<std::size_t>(me.position(0) + me.length(0));
    auto stop = s.size();
    if (has_a && static_cast<std::size_t>(ma.position(0)) > start) stop = static_cast<std::size_t>(ma.position(0));
    auto body = text::normalize_ws(s.substr(start, stop - start));
    if (!body.empty()) return body;
  }
  if (has_a) {
    auto body = text::normalize_ws(s.substr(static_cast<std::size_t>(ma.position(0) + ma.length(0))));
    if (!body.empty()) return body;
  }
  return text::normalize_ws(s);
}

LongFormAnswer generate_answer(const Question& q, LlmClient& llm) {
  if (text::trim(q.text).empty()) throw PreconditionError("question text is empty");
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto resp = llm.complete("answer", {{"question", q.text}});
    auto body = extract_answer_text(resp.text);
    if (!body.empty()) return LongFormAnswer(std::move(body));
  }
  throw EmptyGeneration("model returned a blank answer for question " + q.id);
}

AnswerDecomposition parse_decomposition_json(std::string_view raw, const LongFormAnswer& x) {
  const auto body = extract_json_object(raw);
  if (body.empty()) throw ParseError("no JSON object in model output");
  OrderedJson doc;
  try {
    doc = OrderedJson::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("top level is not an object");
  const auto it = doc.find("output");
  if (it == doc.end()) throw ParseError("missing \"output\"");
  if (!it->is_array()) throw ParseError("\"output\" is not an array");

  std::vector<RawClause> raw_clauses;
  for (const auto& element : *it) {
    if (!element.is_object()) throw ParseError("clause entry is not an object");
    for (const auto& [key, value] : element.items()) {
      RawClause rc{text::trim(key), clause_label(key), facts_from(value, key)};
      if (rc.key.empty()) throw ParseError("clause with an empty key");
      if (rc.facts.empty()) {
        throw ParseError("clause " + std::to_string(raw_clauses.size() + 1) + " has no atomic facts");
      }
      raw_clauses.push_back(std::move(rc));
    }
  }
  if (raw_clauses.empty()) throw ParseError("\"output\" has no clauses");

  const bool all_labeled =
      std::all_of(raw_clauses.begin(), raw_clauses.end(), [](const RawClause& c) { return c.label.has_value(); });
  if (all_labeled) {
    std::stable_sort(raw_clauses.begin(), raw_clauses.end(),
                     [](const RawClause& a, const RawClause& b) { return *a.label < *b.label; });
  }
  const auto sentences = text::split_sentences(x.text());

  AnswerDecomposition d;
  d.answer = x;
  for (std::size_t k = 0; k < raw_clauses.size(); ++k) {
    auto& rc = raw_clauses[k];
    MolecularClause c;
    c.index = static_cast<int>(k) + 1;
    if (rc.label) {
      const auto n = static_cast<std::size_t>(*rc.label);
      c.text = (sentences.size() == raw_clauses.size() && n >= 1 && n <= sentences.size())
                   ? sentences[n - 1]
                   : text::join(rc.facts, " ");
    } else {
      c.text = rc.key;
    }
    for (std::size_t j = 0; j < rc.facts.size(); ++j) {
      c.atomic_facts.push_back(AtomicFact::make(c.index, static_cast<int>(j) + 1, std::move(rc.facts[j])));
    }
    d.clauses.push_back(std::move(c));
  }
  return d;
}

std::string serialize_decomposition_json(const AnswerDecomposition& d) {
  OrderedJson out = OrderedJson::object();
  auto& arr = out["output"] = OrderedJson::array();
  for (const auto& c : d.clauses) {
    OrderedJson facts = OrderedJson::array();
    for (const auto& f : c.atomic_facts) facts.push_back(f.text);
    OrderedJson element = OrderedJson::object();
    element[c.text] = std::move(facts);
    arr.push_back(std::move(element));
  }
  return out.dump();
}

AnswerDecomposition sentence_split_fallback(const LongFormAnswer& x) {
  AnswerDecomposition d;
  d.answer = x;
  int i = 0;
  for (auto& s : text::split_sentences(x.text())) {
    ++i;
    MolecularClause c;
    c.index = i;
    c.text = s;
    c.atomic_facts.push_back(AtomicFact::make(i, 1, std::move(s)));
    d.clauses.push_back(std::move(c));
  }
  return d;
}

AnswerDecomposition decompose(const LongFormAnswer& x, LlmClient& llm, std::vector<std::string>* warnings) {
  if (x.empty()) throw PreconditionError("cannot decompose an empty answer");

  auto attempt = [&](const std::string& raw) {
    auto d = parse_decomposition_json(raw, x);
    if (const auto v = validate_decomposition(d); !v.empty()) throw ParseError(v.front());
    return d;
  };

  const auto first = llm.complete("decompose", {{"answer", x.text()}});
  try {
    return attempt(first.text);
  } catch (const ParseError& e1) {
    const auto second = llm.complete("decompose+json_repair",
                                     {{"answer", x.text()}, {"previous", first.text}, {"error", e1.what()}});
    try {
      return attempt(second.text);
    } catch (const ParseError& e2) {
      if (warnings != nullptr) {
        warnings->push_back(std::string("decomposition fell back to sentence split: ") + e2.what());
      }
      return sentence_split_fallback(x);
    }
  }
}

double count_consistency(std::size_t predicted, std::size_t gold) {
  const auto hi = std::max(predicted, gold);
  if (hi == 0) return 1.0;
  const auto diff = predicted > gold ? predicted - gold : gold - predicted;
  return std::clamp(1.0 - static_cast<double>(diff) / static_cast<double>(hi), 0.0, 1.0);
}

LevelScores consistency_score(const AnswerDecomposition& pred, const AnswerDecomposition& gold) {
  return {count_consistency(pred.clauses.size(), gold.clauses.size()),
          count_consistency(pred.fact_count(), gold.fact_count())};
}

LevelScores correctness_score(const AnswerDecomposition& pred, NliProvider& judge) {
  const auto& source = pred.answer.text();
  std::size_t clause_ok = 0;
  std::size_t fact_ok = 0;
  std::size_t facts = 0;
  for (const auto& c : pred.clauses) {
    if (judge.nli(source, c.text).binary_entail) ++clause_ok;
    for (const auto& f : c.atomic_facts) {
      ++facts;
      if (judge.nli(source, f.text).binary_entail) ++fact_ok;
    }
  }
  LevelScores s;
  if (!pred.clauses.empty()) s.molecular = static_cast<double>(clause_ok) / static_cast<double>(pred.clauses.size());
  if (facts > 0) s.atomic = static_cast<double>(fact_ok) / static_cast<double>(facts);
  return s;
}

}  // namespace are::decomposition
