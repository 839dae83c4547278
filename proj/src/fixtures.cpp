#include "are/fixtures.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "are/errors.hpp"
#include "are/prompts.hpp"
#include "are/text.hpp"

namespace are::fixtures {

namespace {

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class T>
std::vector<T> read_entries(const std::filesystem::path& file) {
  std::vector<T> out;
  std::size_t n = 0;
  for (const auto& j : read_jsonl(file)) {
    ++n;
    try {
      out.push_back(j.get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(file.filename().string() + " entry " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Json> read_jsonl(const std::filesystem::path& file) {
  std::istringstream in(slurp(file));
  std::vector<Json> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(file.filename().string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path& file, const std::vector<Json>& lines) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + file.string());
  for (const auto& j : lines) out << j.dump() << '\n';
}

std::vector<Question> parse_questions(const std::string& content) {
  std::istringstream in(content);
  std::vector<Question> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    Question q;
    try {
      q = Json::parse(line).get<Question>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("questions line " + std::to_string(n) + ": " + e.what());
    }
    if (text::trim(q.text).empty()) throw InputError("questions line " + std::to_string(n) + ": empty question");
    if (q.id.empty()) q.id = std::to_string(n);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Question> load_questions(const std::filesystem::path& file) { return parse_questions(slurp(file)); }

std::shared_ptr<EmbeddingProvider> load_embedder(const std::filesystem::path& file) {
  std::map<std::string, std::vector<double>> table;
  std::optional<std::size_t> trigram;
  for (const auto& j : read_jsonl(file)) {
    try {
      if (j.contains("mode")) {
        if (j["mode"] != "trigram") throw InputError("embed.jsonl: unknown mode " + j["mode"].dump());
        trigram = j.value("dim", std::size_t{64});
      } else {
        table[j.at("text").get<std::string>()] = j.at("vector").get<std::vector<double>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("embed.jsonl: ") + e.what());
    }
  }
  if (table.empty() && trigram) return std::make_shared<TrigramEmbedder>(*trigram);
  return std::make_shared<FixtureEmbedder>(std::move(table), trigram);
}

std::shared_ptr<NliProvider> load_nli(const std::filesystem::path& file) {
  std::vector<NliFixtureEntry> entries;
  bool overlap = false;
  for (const auto& j : read_jsonl(file)) {
    try {
      if (j.contains("mode")) {
        if (j["mode"] != "overlap") throw InputError("nli.jsonl: unknown mode " + j["mode"].dump());
        overlap = true;
      } else {
        entries.push_back({j.at("premise").get<std::string>(), j.at("hypothesis").get<std::string>(),
                           NliVerdict{j.at("entail_prob").get<double>(), j.at("binary_entail").get<bool>()}});
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("nli.jsonl: ") + e.what());
    }
  }
  if (entries.empty() && overlap) return std::make_shared<OverlapNli>();
  return std::make_shared<FixtureNli>(std::move(entries), overlap);
}

ProviderBundle FixtureSuite::bundle() const {
  ProviderBundle b;
  b.chat = chat;
  b.search = search;
  b.embed = embed;
  b.nli = nli;
  b.clock = std::make_shared<FrozenClock>();
  return b;
}

std::vector<std::string> FixtureSuite::files() const {
  std::vector<std::string> out;
  for (const auto* f : kSuiteFiles) {
    if (std::filesystem::exists(dir / f)) out.emplace_back(f);
  }
  if (!manifest.is_null()) out.emplace_back("manifest.json");
  return out;
}

FixtureSuite load_fixture_suite(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError("fixture suite " + dir.string() + " is not a directory");
  FixtureSuite s;
  s.dir = dir;
  std::vector<std::string> required(kSuiteFiles.begin(), kSuiteFiles.end());
  if (std::filesystem::exists(dir / "manifest.json")) {
    try {
      s.manifest = Json::parse(slurp(dir / "manifest.json"));
      required = s.manifest.at("files").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("manifest.json: ") + e.what());
    }
  }
  for (const auto& f : required) {
    if (!std::filesystem::exists(dir / f)) throw InputError("fixture suite " + dir.string() + " lacks " + f);
  }
  s.chat = std::make_shared<FixtureChat>(read_entries<ChatTranscriptEntry>(dir / "chat.jsonl"));
  s.search = std::make_shared<FixtureSearch>(read_entries<SearchFixtureEntry>(dir / "search.jsonl"));
  s.embed = load_embedder(dir / "embed.jsonl");
  s.nli = load_nli(dir / "nli.jsonl");
  if (std::filesystem::exists(dir / "questions.jsonl")) s.questions = load_questions(dir / "questions.jsonl");
  return s;
}

RekeyReport rekey_chat(const std::filesystem::path& chat_file) {
  auto entries = read_entries<ChatTranscriptEntry>(chat_file);
  RekeyReport r;
  std::vector<Json> lines;
  for (auto& e : entries) {
    ++r.total;
    if (e.task.empty()) {
      ++r.without_provenance;
    } else {
      const auto key = chat_key(prompts::render(e.task, e.vars));
      if (key != e.key) {
        e.key = key;
        ++r.changed;
      }
    }
    lines.emplace_back(e);
  }
  write_jsonl(chat_file, lines);
  return r;
}

std::vector<std::string> check_suite(const std::filesystem::path& dir) {
  std::vector<std::string> problems;
  try {
    load_fixture_suite(dir);
  } catch (const std::exception& e) {
    problems.emplace_back(e.what());
    return problems;
  }
  std::size_t n = 0;
  for (const auto& e : read_entries<ChatTranscriptEntry>(dir / "chat.jsonl")) {
    ++n;
    if (e.task.empty()) continue;
    try {
      const auto key = chat_key(prompts::render(e.task, e.vars));
      if (key != e.key) {
        problems.push_back("chat entry " + std::to_string(n) + " (" + e.task + ") has stale key " + e.key +
                           ", current prompt hashes to " + key);
      }
    } catch (const std::exception& ex) {
      problems.push_back("chat entry " + std::to_string(n) + " (" + e.task + "): " + ex.what());
    }
  }
  return problems;
}

}  // namespace are::fixtures
