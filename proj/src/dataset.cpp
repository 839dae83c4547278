#include "are/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "are/decomposition.hpp"
#include "are/errors.hpp"
#include "are/parallel.hpp"
#include "are/text.hpp"

namespace are::dataset {

void to_json(Json& j, const Triple& v) {
  j = Json{{"subject", v.subject}, {"property", v.property}, {"object", v.object}, {"property_id", v.property_id}};
}

void from_json(const Json& j, Triple& v) {
  v.subject = j.at("subject").get<std::string>();
  v.property = j.at("property").get<std::string>();
  v.object = j.at("object").get<std::string>();
  v.property_id = j.value("property_id", "");
}

std::string sample_to_jsonl(const InstructionSample& s) {
  nlohmann::ordered_json j;
  j["entity_id"] = s.entity_id;
  j["Generated content"] = s.generated_text;
  j["output"] = nlohmann::ordered_json::parse(decomposition::serialize_decomposition_json(s.alignment))["output"];
  auto& triples = j["source_triples"] = nlohmann::ordered_json::array();
  for (const auto& t : s.source_triples) {
    triples.push_back(
        {{"subject", t.subject}, {"property", t.property}, {"object", t.object}, {"property_id", t.property_id}});
  }
  return j.dump();
}

InstructionSample sample_from_jsonl(const std::string& line) {
  try {
    const auto j = Json::parse(line);
    InstructionSample s;
    s.entity_id = j.at("entity_id").get<std::string>();
    s.generated_text = j.at("Generated content").get<std::string>();
    s.alignment = decomposition::parse_decomposition_json(line, LongFormAnswer(s.generated_text));
    s.source_triples = j.at("source_triples").get<std::vector<Triple>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed dataset line: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Knowledge graph clients

TsvKg TsvKg::parse(const std::string& content) {
  TsvKg kg;
  std::istringstream in(content);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(text::trim(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    cols.resize(4);
    if (cols[0].empty()) throw InputError("kg line " + std::to_string(n) + ": empty subject");
    auto& bucket = kg.by_subject_[cols[0]];
    if (cols[1].empty() && cols[2].empty()) continue;
    if (cols[1].empty() || cols[2].empty()) {
      throw InputError("kg line " + std::to_string(n) + ": property and object must both be present");
    }
    bucket.push_back(Triple{cols[0], cols[1], cols[2], cols[3]});
  }
  return kg;
}

TsvKg TsvKg::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<Triple> TsvKg::one_hop(const std::string& entity_id) {
  const auto it = by_subject_.find(entity_id);
  if (it == by_subject_.end()) throw UnknownEntity(entity_id);
  return it->second;
}

std::vector<std::string> TsvKg::entities() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : by_subject_) out.push_back(k);
  return out;
}

WikidataKg::WikidataKg(std::shared_ptr<http::Transport> t, std::string endpoint, http::RetryPolicy policy,
                       std::string language)
    : t_(std::move(t)), endpoint_(std::move(endpoint)), policy_(std::move(policy)), lang_(std::move(language)) {}

namespace {

const http::Headers& wikidata_headers() {
  static const http::Headers h{{"User-Agent", "are-dataset-builder/0.1 (knowledge graph triple export)"}};
  return h;
}

bool is_item_id(const std::string& s) {
  static const std::regex id(R"(^Q[0-9]+$)");
  return std::regex_match(s, id);
}

// Object label of a main snak, or nullopt for value types we do not verbalize.
std::optional<std::string> snak_value(const Json& snak, std::vector<std::string>& need_labels) {
  const auto dv = snak.find("datavalue");
  if (dv == snak.end()) return std::nullopt;
  const auto type = dv->value("type", "");
  const auto v = dv->value("value", Json());
  if (v.is_null()) return std::nullopt;
  if (type == "wikibase-entityid") {
    const auto id = v.value("id", "");
    if (id.empty()) return std::nullopt;
    need_labels.push_back(id);
    return id;
  }
  if (type == "string") return v.is_string() ? v.get<std::string>() : std::string();
  if (type == "monolingualtext") return v.value("text", "");
  if (type == "time") {
    auto t = v.value("time", "");
    if (!t.empty() && (t.front() == '+' || t.front() == '-')) t.erase(0, 1);
    return t.substr(0, t.find('T'));
  }
  if (type == "quantity") {
    auto a = v.value("amount", "");
    if (!a.empty() && a.front() == '+') a.erase(0, 1);
    return a;
  }
  return std::nullopt;
}

}  // namespace

std::string WikidataKg::resolve(const std::string& entity) const {
  if (is_item_id(entity)) return entity;
  const http::Params p{{"action", "wbsearchentities"}, {"search", entity}, {"language", lang_},
                       {"format", "json"},             {"limit", "1"},     {"type", "item"}};
  const auto j = http::request_json([&] { return t_->get(endpoint_, p, wikidata_headers()); }, policy_,
                                    "wbsearchentities");
  const auto hits = j.find("search");
  if (hits == j.end() || !hits->is_array() || hits->empty()) throw UnknownEntity(entity);
  return (*hits)[0].value("id", "");
}

std::map<std::string, std::string> WikidataKg::labels(const std::vector<std::string>& ids) const {
  std::map<std::string, std::string> out;
  for (std::size_t at = 0; at < ids.size(); at += 50) {
    const auto end = std::min(ids.size(), at + 50);
    const std::vector<std::string> batch(ids.begin() + static_cast<std::ptrdiff_t>(at),
                                         ids.begin() + static_cast<std::ptrdiff_t>(end));
    const http::Params p{{"action", "wbgetentities"}, {"ids", text::join(batch, "|")}, {"props", "labels"},
                         {"languages", lang_},         {"format", "json"}};
    const auto j = http::request_json([&] { return t_->get(endpoint_, p, wikidata_headers()); }, policy_,
                                      "wbgetentities");
    for (const auto& [id, e] : j.value("entities", Json::object()).items()) {
      const auto l = e.value("labels", Json::object());
      if (l.contains(lang_)) out[id] = l[lang_].value("value", id);
    }
  }
  return out;
}

std::vector<Triple> WikidataKg::one_hop(const std::string& entity_id) {
  const auto id = resolve(entity_id);
  const http::Params p{{"action", "wbgetentities"}, {"ids", id}, {"props", "labels|claims"}, {"languages", lang_},
                       {"format", "json"}};
  const auto j = http::request_json([&] { return t_->get(endpoint_, p, wikidata_headers()); }, policy_,
                                    "wbgetentities");
  const auto ents = j.value("entities", Json::object());
  if (!ents.contains(id) || ents[id].contains("missing")) throw UnknownEntity(entity_id);
  const auto& e = ents[id];
  std::string subject = id;
  if (const auto l = e.value("labels", Json::object()); l.contains(lang_)) subject = l[lang_].value("value", id);

  struct Raw {
    std::string pid;
    std::string object;
  };
  std::vector<Raw> raw;
  std::vector<std::string> need;
  for (const auto& [pid, statements] : e.value("claims", Json::object()).items()) {
    need.push_back(pid);
    for (const auto& st : statements) {
      if (auto v = snak_value(st.value("mainsnak", Json::object()), need)) raw.push_back({pid, *v});
    }
  }
  std::sort(need.begin(), need.end());
  need.erase(std::unique(need.begin(), need.end()), need.end());
  const auto names = labels(need);
  auto label_of = [&](const std::string& s) {
    const auto it = names.find(s);
    return it == names.end() ? s : it->second;
  };

  std::vector<Triple> out;
  for (const auto& r : raw) {
    const bool entity_valued = is_item_id(r.object);
    const auto object = entity_valued ? label_of(r.object) : r.object;
    if (object.empty()) continue;
    out.push_back(Triple{subject, label_of(r.pid), object, r.pid});
  }
  return out;
}

std::vector<Triple> fetch_one_hop(const std::string& entity_id, KgClient& kg) {
  auto ts = kg.one_hop(entity_id);
  if (ts.empty()) return ts;
  const auto subject = ts.front().subject;
  for (const auto& t : ts) {
    if (t.subject != subject) throw ProviderError("knowledge graph returned triples of several subjects");
    if (t.subject.empty() || t.property.empty() || t.object.empty()) {
      throw ProviderError("knowledge graph returned a triple with an empty label");
    }
  }
  return ts;
}

// ---------------------------------------------------------------------------
// Filtering

bool looks_like_code(std::string_view object) {
  const auto s = text::trim(object);
  if (s.empty()) return false;
  if (s.find_first_of(" \t\n") != std::string::npos) return false;
  static const std::regex harmless(R"(^[+-]?\d{1,4}$|^[+-]?\d+[.,]\d+$|^\d{4}-\d{2}(-\d{2})?$|^\d+(st|nd|rd|th)$)",
                                   std::regex::icase);
  if (std::regex_match(s, harmless)) return false;
  bool digit = false;
  bool letter = false;
  bool sep = false;
  int digits = 0;
  for (unsigned char c : s) {
    if (std::isdigit(c)) {
      digit = true;
      ++digits;
    } else if (std::isalpha(c)) {
      letter = true;
    } else if (c == '-' || c == '_' || c == '/' || c == ':' || c == '.' || c == '#') {
      sep = true;
    }
  }
  return digit && (letter || sep || digits >= 5);
}

FilterRules FilterRules::defaults() {
  FilterRules r;
  r.denied_properties = {"issn",          "isbn-10",         "isbn-13",           "image",
                         "logo image",    "commons category", "commons gallery",   "signature",
                         "flag image",    "coat of arms image", "locator map image", "pronunciation audio",
                         "audio",         "video",           "doi",               "barcode",
                         "code",          "icon",            "banner image",      "spoken text audio"};
  r.denied_property_ids = {"P18",  "P154", "P236", "P212", "P957", "P373", "P935", "P109", "P41",
                           "P94",  "P242", "P443", "P51",  "P10",  "P356", "P646", "P214", "P227",
                           "P244", "P345", "P213", "P268", "P269", "P496", "P2002", "P8687"};
  r.denied_property_words = {"id", "identifier", "code", "issn", "isbn", "image", "logo", "commons", "url",
                             "website", "audio", "video", "file", "jpeg", "svg", "doi", "barcode"};
  r.denied_objects = {
      std::regex(R"(^(https?|ftp)://|^www\.)", std::regex::icase),
      std::regex(R"(\.(jpe?g|png|gif|svg|tiff?|bmp|webp|webm|ogg|oga|ogv|mp3|mp4|wav|flac|pdf|djvu)$)",
                 std::regex::icase),
      std::regex(R"(^(jpe?g|png|gif|svg|tiff?)$)", std::regex::icase),
  };
  return r;
}

bool FilterRules::denies(const Triple& t) const {
  const auto prop = text::casefold(text::normalize_ws(t.property));
  if (denied_properties.count(prop) > 0) return true;
  if (!t.property_id.empty() && denied_property_ids.count(t.property_id) > 0) return true;
  for (const auto& w : text::content_words(prop)) {
    if (std::find(denied_property_words.begin(), denied_property_words.end(), w) != denied_property_words.end()) {
      return true;
    }
  }
  const auto obj = text::trim(t.object);
  for (const auto& re : denied_objects) {
    if (std::regex_search(obj, re)) return true;
  }
  return deny_code_objects && looks_like_code(obj);
}

std::vector<Triple> filter_triples(const std::vector<Triple>& ts, const FilterRules& rules) {
  std::vector<Triple> out;
  std::copy_if(ts.begin(), ts.end(), std::back_inserter(out), [&](const Triple& t) { return !rules.denies(t); });
  return out;
}

// ---------------------------------------------------------------------------
// Sampling and verbalization

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw PreconditionError("uniform_below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  while (true) {
    const std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

std::vector<Triple> select_triples(const std::vector<Triple>& ts, std::mt19937_64& rng, int min_count,
                                   int max_count) {
  if (min_count < 1 || max_count < min_count) throw PreconditionError("select_triples: bad count range");
  const auto want = static_cast<std::size_t>(min_count) +
                    uniform_below(rng, static_cast<std::uint64_t>(max_count - min_count + 1));
  if (ts.size() <= want) return ts;
  std::vector<std::size_t> idx(ts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Partial Fisher-Yates: the first `want` slots become a uniform subset.
  for (std::size_t i = 0; i < want; ++i) {
    const auto j = i + uniform_below(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(want);
  std::sort(idx.begin(), idx.end());
  std::vector<Triple> out;
  for (auto i : idx) out.push_back(ts[i]);
  return out;
}

std::string template_fact(const Triple& t) {
  return "The " + t.property + " of " + t.subject + " is " + t.object + ".";
}

std::vector<std::string> triples_to_facts(const std::vector<Triple>& ts, LlmClient& llm) {
  std::vector<std::string> out;
  for (const auto& t : ts) {
    auto reply = llm.complete("triple_to_fact", {{"subject", t.subject}, {"property", t.property}, {"object", t.object}});
    auto fact = text::normalize_ws(reply.text.substr(0, reply.text.find('\n')));
    if (fact.size() >= 2 && fact.front() == '"' && fact.back() == '"') fact = fact.substr(1, fact.size() - 2);
    if (fact.empty() || text::casefold(fact).find(text::casefold(t.subject)) == std::string::npos) {
      fact = template_fact(t);
    }
    out.push_back(std::move(fact));
  }
  return out;
}

std::vector<std::string> sample_violations(const AnswerDecomposition& alignment, const std::vector<std::string>& facts,
                                           const std::vector<Triple>& triples) {
  auto out = validate_decomposition(alignment);
  std::set<std::string> inputs;
  for (const auto& f : facts) inputs.insert(text::normalize_ws(f));
  std::set<std::string> covered;
  for (const auto& c : alignment.clauses) {
    for (const auto& f : c.atomic_facts) {
      const auto ref = "(" + std::to_string(f.clause_index) + "," + std::to_string(f.fact_index) + ")";
      const auto norm = text::normalize_ws(f.text);
      if (inputs.count(norm) == 0) {
        out.push_back("atomic fact " + ref + " is not among the input facts: " + norm);
      } else {
        covered.insert(norm);
      }
      const auto folded = text::casefold(norm);
      const bool traceable = std::any_of(triples.begin(), triples.end(), [&](const Triple& t) {
        return folded.find(text::casefold(t.subject)) != std::string::npos ||
               folded.find(text::casefold(t.object)) != std::string::npos;
      });
      if (!traceable) out.push_back("atomic fact " + ref + " is not traceable to a source triple");
    }
  }
  for (const auto& f : inputs) {
    if (covered.count(f) == 0) out.push_back("input fact not covered by the alignment: " + f);
  }
  return out;
}

namespace {

InstructionSample parse_sample(const std::string& raw) {
  const auto body = decomposition::extract_json_object(raw);
  if (body.empty()) throw ParseError("no JSON object in model output");
  Json j;
  try {
    j = Json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  const auto it = j.find("Generated content");
  if (it == j.end() || !it->is_string()) throw ParseError("missing \"Generated content\"");
  InstructionSample s;
  s.generated_text = text::normalize_ws(it->get<std::string>());
  if (s.generated_text.empty()) throw ParseError("\"Generated content\" is empty");
  s.alignment = decomposition::parse_decomposition_json(body, LongFormAnswer(s.generated_text));
  return s;
}

InstructionSample fallback_sample(const std::vector<std::string>& facts) {
  InstructionSample s;
  std::vector<std::string> norm;
  for (const auto& f : facts) norm.push_back(text::normalize_ws(f));
  s.generated_text = text::join(norm, " ");
  s.alignment.answer = LongFormAnswer(s.generated_text);
  for (std::size_t i = 0; i < norm.size(); ++i) {
    const int idx = static_cast<int>(i) + 1;
    s.alignment.clauses.push_back(MolecularClause{idx, norm[i], {AtomicFact::make(idx, 1, norm[i])}});
  }
  return s;
}

}  // namespace

SampleOutcome facts_to_sample(const std::vector<std::string>& facts, const std::vector<Triple>& triples,
                              LlmClient& llm) {
  if (facts.empty()) throw PreconditionError("facts_to_sample needs at least one fact");
  std::string listing;
  for (const auto& f : facts) listing += "- " + text::normalize_ws(f) + "\n";
  listing.pop_back();

  InstructionSample s;
  const auto first = llm.complete("facts_to_text", {{"facts", listing}});
  try {
    s = parse_sample(first.text);
  } catch (const ParseError& e1) {
    const auto second =
        llm.complete("facts_to_text+json_repair", {{"facts", listing}, {"previous", first.text}, {"error", e1.what()}});
    try {
      s = parse_sample(second.text);
    } catch (const ParseError&) {
      s = fallback_sample(facts);
    }
  }
  s.source_triples = triples;
  SampleOutcome out;
  out.violations = sample_violations(s.alignment, facts, triples);
  if (out.violations.empty()) out.sample = std::move(s);
  return out;
}

// ---------------------------------------------------------------------------
// Build

DatasetSplit build_dataset(const std::vector<std::string>& entity_ids, KgClient& kg, ChatProvider& chat,
                           const BuildOptions& opt) {
  if (opt.split_ratio < 0.0 || opt.split_ratio > 1.0) throw PreconditionError("split ratio must be in [0, 1]");
  struct Outcome {
    std::optional<InstructionSample> sample;
    std::string failure;
  };
  std::vector<Outcome> results(entity_ids.size());

  auto build_one = [&](std::size_t i) {
    const auto& id = entity_ids[i];
    try {
      std::mt19937_64 rng(opt.seed ^ text::fnv1a64(id));
      const auto kept = filter_triples(fetch_one_hop(id, kg), opt.rules);
      if (kept.empty()) {
        results[i].failure = "no triples left after filtering";
        return;
      }
      const auto chosen = select_triples(kept, rng);
      LlmClient llm(chat);
      const auto facts = triples_to_facts(chosen, llm);
      auto outcome = facts_to_sample(facts, chosen, llm);
      if (!outcome.sample) {
        results[i].failure = "sample rejected: " + text::join(outcome.violations, "; ");
        return;
      }
      outcome.sample->entity_id = id;
      results[i].sample = std::move(outcome.sample);
    } catch (const std::exception& e) {
      results[i].failure = e.what();
    }
  };

  parallel_for(entity_ids.size(), opt.parallelism, build_one);

  DatasetSplit split;
  std::vector<InstructionSample> samples;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].sample) {
      samples.push_back(std::move(*results[i].sample));
    } else {
      split.failures.push_back({entity_ids[i], results[i].failure});
    }
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const InstructionSample& a, const InstructionSample& b) { return a.entity_id < b.entity_id; });
  std::mt19937_64 rng(opt.seed);
  for (std::size_t i = samples.size(); i > 1; --i) {
    std::swap(samples[i - 1], samples[uniform_below(rng, i)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(samples.size()) * opt.split_ratio));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (i < n_train ? split.train : split.eval).push_back(std::move(samples[i]));
  }

  if (opt.out_dir && (!split.train.empty() || !split.eval.empty())) {
    std::filesystem::create_directories(*opt.out_dir);
    for (const auto& [name, part] : {std::pair{"train.jsonl", &split.train}, std::pair{"eval.jsonl", &split.eval}}) {
      std::ofstream out(*opt.out_dir / name, std::ios::binary | std::ios::trunc);
      if (!out) throw InputError("cannot write " + (*opt.out_dir / name).string());
      for (const auto& s : *part) out << sample_to_jsonl(s) << '\n';
    }
  }
  return split;
}

}  // namespace are::dataset
