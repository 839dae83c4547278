// Regenerates the fixture suites from rule-based stand-ins for the chat and
// search services. Every exchange the pipeline makes is recorded, so the
// written suites replay the runs exactly.
//
//   author_fixtures <fixtures-dir>
//
// Writes <dir>/brady and <dir>/kg20. kg20/kg.tsv is hand-written input and is
// left untouched; everything else is overwritten.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include "are/dataset.hpp"
#include "are/errors.hpp"
#include "are/fixtures.hpp"
#include "are/mock_providers.hpp"
#include "are/pipeline.hpp"
#include "are/text.hpp"

namespace {

using namespace are;
namespace fs = std::filesystem;

// Search by table lookup on the normalized query; every query asked is kept.
class TableSearch final : public SearchProvider {
 public:
  void add(const std::string& query, std::vector<SearchResult> results) {
    table_[normalize_query(query)] = std::move(results);
  }

  std::vector<SearchResult> search(const std::string& query, int k) override {
    std::lock_guard lock(mu_);
    const auto key = normalize_query(query);
    std::vector<SearchResult> out;
    if (const auto it = table_.find(key); it != table_.end()) out = it->second;
    if (out.size() > static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k));
    asked_.emplace(key, out);
    return out;
  }

  std::vector<Json> lines() const {
    std::lock_guard lock(mu_);
    std::vector<Json> out;
    for (const auto& [q, r] : asked_) out.emplace_back(SearchFixtureEntry{q, r});
    return out;
  }

 private:
  std::map<std::string, std::vector<SearchResult>> table_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<SearchResult>> asked_;
};

std::string strip_period(std::string s) {
  s = text::trim(s);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

bool contains_ci(const std::string& hay, const std::string& needle) {
  return text::casefold(hay).find(text::casefold(needle)) != std::string::npos;
}

std::string verdict_reply(int v) {
  static const char* names[] = {"", "supportive", "editing required", "irrelevant"};
  return std::string("4. Reasoning: Compared the statement with the article.\n5. Therefore: ") + std::to_string(v) +
         " (" + names[v] + ")";
}

// The payload's clause facts joined per clause.
std::string join_payload(const std::string& payload, const std::function<std::string(std::vector<std::string>)>& merge) {
  const auto doc = Json::parse(payload);
  std::vector<std::string> sentences;
  for (const auto& clause : doc.at("clauses")) {
    for (const auto& [label, facts] : clause.items()) sentences.push_back(merge(facts.get<std::vector<std::string>>()));
  }
  return "Sentences: " + text::join(sentences, " ");
}

std::vector<Json> sorted_chat(const RecordingChat& rec) {
  auto entries = rec.entries();
  std::sort(entries.begin(), entries.end(),
            [](const ChatTranscriptEntry& a, const ChatTranscriptEntry& b) { return a.key < b.key; });
  std::vector<Json> out;
  for (const auto& e : entries) out.emplace_back(e);
  return out;
}

void write_text(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + file.string());
  out << content;
}

void write_common(const fs::path& dir, const std::string& name, const RecordingChat& chat, const TableSearch& search,
                  const std::vector<Question>& questions) {
  fixtures::write_jsonl(dir / "chat.jsonl", sorted_chat(chat));
  fixtures::write_jsonl(dir / "search.jsonl", search.lines());
  fixtures::write_jsonl(dir / "embed.jsonl", {Json{{"mode", "trigram"}, {"dim", 64}}});
  fixtures::write_jsonl(dir / "nli.jsonl", {Json{{"mode", "overlap"}}});
  std::vector<Json> qs;
  for (const auto& q : questions) qs.emplace_back(q);
  fixtures::write_jsonl(dir / "questions.jsonl", qs);
  Json manifest{{"name", name},
                {"version", 1},
                {"files", std::vector<std::string>(fixtures::kSuiteFiles.begin(), fixtures::kSuiteFiles.end())}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

pipeline::PipelineOptions serial_options() {
  pipeline::PipelineOptions opt;
  opt.fact_parallelism = 1;
  return opt;
}

// ---------------------------------------------------------------------------
// brady: the Super Bowl rings walkthrough.

void author_brady(const fs::path& dir) {
  const std::string mf1 = "The player with the most Super Bowl rings is Tom Brady.";
  const std::string mf2 = "Tom Brady is an American football quarterback who has won six Super Bowl championships.";
  const std::string af21 = "Tom Brady is an American football quarterback.";
  const std::string af22 = "Tom Brady has won six Super Bowl championships.";
  const std::string fixed22 = "Tom Brady has won seven Super Bowl championships.";
  const std::string sport = "Tom Brady plays American football.";

  const std::string e11 = "Tom Brady holds the record for the most Super Bowl rings won by a player.";
  const std::string e21_off = "The Brady Bunch is an American television sitcom that aired from 1969 to 1974.";
  const std::string e21 =
      "Thomas Edward Patrick Brady Jr. is an American former football quarterback who played 23 seasons in the NFL.";
  const std::string e22 = "Tom Brady won seven Super Bowl championships, the most of any player in NFL history.";
  const std::string e_sport = "Tom Brady plays American football and spent 20 seasons with the New England Patriots.";

  TableSearch search;
  search.add(mf1, {{"Super Bowl records", e11, "https://example.org/super-bowl-records"}});
  search.add(af21, {{"The Brady Bunch", e21_off, "https://example.org/brady-bunch"}});
  search.add("Thomas Edward Patrick Brady Jr. quarterback", {{"Tom Brady", e21, "https://example.org/tom-brady"}});
  search.add(af22, {{"Super Bowl champions", e22, "https://example.org/super-bowl-champions"},
                    {"The Brady Bunch", e21_off, "https://example.org/brady-bunch"}});
  search.add(sport, {{"Tom Brady", e_sport, "https://example.org/tom-brady-career"}});

  auto rules = [&](const ChatRequest& req) -> std::string {
    const auto& v = req.vars;
    if (req.task == "answer") {
      const auto q = v.at("question").get<std::string>();
      if (contains_ci(q, "sport")) return "1.Question: " + q + "\n2.Explanation: " + sport + "\n3.Answer: American football.";
      return "1.Question: " + q + "\n2.Explanation: " + mf1 + " " + mf2 + "\n3.Answer: Tom Brady.";
    }
    if (req.task == "decompose") {
      const auto x = v.at("answer").get<std::string>();
      if (x == sport) return Json{{"output", {{{sport, {sport}}}}}}.dump();
      return Json{{"output", {{{mf1, {mf1}}}, {{mf2, {af21, af22}}}}}}.dump();
    }
    if (req.task == "verify") {
      const auto fact = v.at("fact").get<std::string>();
      const auto ev = v.at("evidence").get<std::string>();
      if (!contains_ci(ev, "Tom Brady") && !contains_ci(ev, "Thomas Edward Patrick Brady")) return verdict_reply(3);
      if (contains_ci(fact, "six") && contains_ci(ev, "seven")) return verdict_reply(2);
      return verdict_reply(1);
    }
    if (req.task == "edit") return "The article says seven, not six.\nMy fix: " + fixed22;
    if (req.task == "expand") return "1. Thomas Edward Patrick Brady Jr. quarterback\n2. Tom Brady American football";
    if (req.task == "backtrack") {
      return join_payload(v.at("payload").get<std::string>(), [](const std::vector<std::string>& facts) {
        if (facts.size() == 2) return strip_period(facts[0]) + " who " + facts[1].substr(std::string("Tom Brady ").size());
        return facts.front();
      });
    }
    throw FixtureMiss("brady author has no rule for task " + req.task);
  };

  auto chat = std::make_shared<RecordingChat>(std::make_shared<FunctionChat>(rules));
  auto embed = std::make_shared<TrigramEmbedder>(64);
  ProviderBundle b{chat, std::shared_ptr<SearchProvider>(&search, [](SearchProvider*) {}), embed,
                   std::make_shared<OverlapNli>(), std::make_shared<FrozenClock>()};

  const std::vector<Question> questions = {{"brady", "Player with most Super Bowl rings?", "brady"},
                                           {"brady-sport", "What sport does Tom Brady play?", "brady"}};
  for (const auto& q : questions) pipeline::run_pipeline(q, b, serial_options());

  fs::create_directories(dir);
  write_common(dir, "brady", *chat, search, questions);
  write_text(dir / "kg.tsv",
             "# subject\tproperty\tobject\tproperty_id\n"
             "Tom Brady\tsport\tAmerican football\tP641\n"
             "Tom Brady\tposition played on team\tquarterback\tP413\n"
             "Tom Brady\tmember of sports team\tNew England Patriots\tP54\n"
             "Tom Brady\tmember of sports team\tTampa Bay Buccaneers\tP54\n"
             "Tom Brady\timage\tTom_Brady_2021.jpg\tP18\n");
}

// ---------------------------------------------------------------------------
// kg20: one question per KG entity plus the dataset-builder exchanges.

std::string verbalize(const dataset::Triple& t) {
  if (t.property == "sport") return t.subject + " plays " + t.object + ".";
  return dataset::template_fact(t);
}

struct Planned {
  std::string subject;
  std::string true_fact;
  std::string query_for_expansion;
};

void author_kg20(const fs::path& dir) {
  auto kg = dataset::TsvKg::load(dir / "kg.tsv");
  const auto rules = dataset::FilterRules::defaults();
  const auto entities = kg.entities();

  std::vector<dataset::Triple> all;
  for (const auto& e : entities) {
    for (auto& t : dataset::filter_triples(kg.one_hop(e), rules)) all.push_back(std::move(t));
  }

  TableSearch search;
  std::map<std::string, std::string> answers;        // question -> explanation
  std::map<std::string, std::string> decompositions;  // answer -> reply
  std::map<std::string, std::string> repairs;         // answer -> repaired reply
  std::map<std::string, Planned> facts;                // sentence -> plan
  std::vector<Question> questions;

  for (std::size_t k = 0; k < entities.size(); ++k) {
    const auto& e = entities[k];
    auto kept = dataset::filter_triples(kg.one_hop(e), rules);
    kept.resize(std::min<std::size_t>(kept.size(), 3));
    std::vector<std::string> sentences;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const auto& t = kept[j];
      const auto truth = verbalize(t);
      std::string said = truth;
      if (k % 3 == 1 && j == 1) {
        const auto wrong = std::find_if(all.begin(), all.end(), [&](const dataset::Triple& o) {
          return o.property == t.property && o.subject != t.subject && o.object != t.object;
        });
        if (wrong != all.end()) said = verbalize({t.subject, t.property, wrong->object, t.property_id});
      }
      sentences.push_back(said);
      const auto expansion = t.subject + " " + t.property;
      facts[said] = {t.subject, truth, expansion};
      const SearchResult good{t.subject, truth + " This statement is recorded in the knowledge base.",
                              "https://example.org/kb/" + text::hex64(text::fnv1a64(truth))};
      const SearchResult filler{"Trivia", "A list of unrelated trivia compiled by volunteers.",
                                "https://example.org/trivia"};
      if (k % 4 == 2 && j == 0) {
        search.add(said, {filler});
      } else {
        search.add(said, {good, filler});
      }
      search.add(expansion, {good});
    }
    const auto x = text::join(sentences, " ");
    Question q{"kg" + std::string(k < 9 ? "0" : "") + std::to_string(k + 1), "Tell me about " + e + ".", "kg20"};
    answers[q.text] = x;
    Json out = Json::array();
    for (const auto& s : sentences) out.push_back({{s, {s}}});
    const auto valid = Json{{"output", out}}.dump();
    if (k % 7 == 3) {
      decompositions[x] = "Here is the decomposition: {\"output\": [{\"" + sentences.front() + "\": ";
      repairs[x] = valid;
    } else {
      decompositions[x] = valid;
    }
    questions.push_back(std::move(q));
  }

  auto rules_fn = [&](const ChatRequest& req) -> std::string {
    const auto& v = req.vars;
    if (req.task == "answer") {
      const auto q = v.at("question").get<std::string>();
      const auto& x = answers.at(q);
      return "1.Question: " + q + "\n2.Explanation: " + x + "\n3.Answer: " + text::split_sentences(x).front();
    }
    if (req.task == "decompose") return decompositions.at(v.at("answer").get<std::string>());
    if (req.task == "decompose+json_repair") return repairs.at(v.at("answer").get<std::string>());
    if (req.task == "verify") {
      const auto fact = v.at("fact").get<std::string>();
      const auto ev = v.at("evidence").get<std::string>();
      const auto it = facts.find(fact);
      const auto subject = it != facts.end() ? it->second.subject : text::split_words(fact).front();
      if (!contains_ci(ev, subject)) return verdict_reply(3);
      if (contains_ci(ev, strip_period(fact))) return verdict_reply(1);
      return verdict_reply(2);
    }
    if (req.task == "edit") {
      return "My fix: " + text::split_sentences(v.at("evidence").get<std::string>()).front();
    }
    if (req.task == "expand") {
      const auto& p = facts.at(v.at("fact").get<std::string>());
      return "1. " + p.query_for_expansion + "\n2. " + p.subject;
    }
    if (req.task == "backtrack") {
      return join_payload(v.at("payload").get<std::string>(),
                          [](const std::vector<std::string>& fs) { return text::join(fs, " "); });
    }
    if (req.task == "triple_to_fact") {
      return verbalize({v.at("subject").get<std::string>(), v.at("property").get<std::string>(),
                        v.at("object").get<std::string>(), ""});
    }
    if (req.task == "facts_to_text" || req.task == "facts_to_text+json_repair") {
      std::vector<std::string> fs;
      std::istringstream in(v.at("facts").get<std::string>());
      for (std::string line; std::getline(in, line);) fs.push_back(text::trim(line.substr(2)));
      Json out = Json::array();
      for (const auto& f : fs) out.push_back({{f, {f}}});
      const auto listing = v.at("facts").get<std::string>();
      if (req.task == "facts_to_text" && text::fnv1a64(listing) % 4 == 0) {
        return "{\"Generated content\": \"" + text::join(fs, " ") + "\", \"output\": [";
      }
      return Json{{"Generated content", text::join(fs, " ")}, {"output", out}}.dump();
    }
    throw FixtureMiss("kg20 author has no rule for task " + req.task);
  };

  auto chat = std::make_shared<RecordingChat>(std::make_shared<FunctionChat>(rules_fn));
  ProviderBundle b{chat, std::shared_ptr<SearchProvider>(&search, [](SearchProvider*) {}),
                   std::make_shared<TrigramEmbedder>(64), std::make_shared<OverlapNli>(),
                   std::make_shared<FrozenClock>()};
  for (const auto& q : questions) {
    const auto r = pipeline::run_pipeline(q, b, serial_options());
    for (const auto& w : r.warnings) std::cerr << q.id << ": " << w << '\n';
  }

  // Dataset exchanges for the default seed and one alternative.
  for (const std::uint64_t seed : {7ULL, 13ULL}) {
    dataset::BuildOptions opt;
    opt.seed = seed;
    opt.parallelism = 1;
    const auto split = dataset::build_dataset(entities, kg, *chat, opt);
    for (const auto& f : split.failures) std::cerr << "dataset seed " << seed << ": " << f.entity_id << ": " << f.reason << '\n';
  }

  write_common(dir, "kg20", *chat, search, questions);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: author_fixtures <fixtures-dir>\n";
    return 3;
  }
  try {
    const fs::path root = argv[1];
    author_brady(root / "brady");
    author_kg20(root / "kg20");
  } catch (const std::exception& e) {
    std::cerr << "author_fixtures: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
