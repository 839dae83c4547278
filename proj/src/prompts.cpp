#include "are/prompts.hpp"

#include <map>
#include <utility>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are::prompts {

namespace detail {
// Generated at configure time from assets/prompts/*.txt.
extern const std::pair<const char*, const char*> kPromptAssets[];
extern const std::size_t kPromptAssetCount;
}  // namespace detail

namespace {

const std::map<std::string, Template, std::less<>>& registry() {
  static const auto table = [] {
    std::map<std::string, Template, std::less<>> t;
    for (std::size_t i = 0; i < detail::kPromptAssetCount; ++i) {
      const auto& [name, source] = detail::kPromptAssets[i];
      t.emplace(name, parse(name, source));
    }
    return t;
  }();
  return table;
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

Template parse(std::string_view name, std::string_view source) {
  Template t;
  t.name = std::string(name);
  std::string* section = nullptr;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    auto end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    const auto line = source.substr(pos, end - pos);
    if (line.starts_with("@version")) {
      t.version = std::stoi(std::string(line.substr(8)));
    } else if (line == "@system") {
      section = &t.system;
    } else if (line == "@user") {
      section = &t.user;
    } else if (section != nullptr) {
      *section += line;
      *section += '\n';
    }
    pos = end + 1;
  }
  t.system = strip_trailing_newlines(std::move(t.system));
  t.user = strip_trailing_newlines(std::move(t.user));
  if (t.version <= 0) throw PreconditionError("prompt template " + t.name + " has no @version");
  return t;
}

const Template& get(std::string_view name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) throw PreconditionError("unknown prompt template: " + std::string(name));
  return it->second;
}

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::string fill(std::string_view tmpl, const Json& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out += tmpl.substr(pos);
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out += tmpl.substr(pos);
      break;
    }
    out += tmpl.substr(pos, open - pos);
    const std::string key(tmpl.substr(open + 2, close - open - 2));
    const auto it = vars.find(key);
    if (it == vars.end()) throw PreconditionError("prompt variable missing: " + key);
    out += it->is_string() ? it->get<std::string>() : it->dump();
    pos = close + 2;
  }
  return out;
}

ChatRequest render(std::string_view task, const Json& vars, int max_output_tokens, double temperature) {
  ChatRequest req;
  req.task = std::string(task);
  req.vars = vars;
  req.max_output_tokens = max_output_tokens;
  req.temperature = temperature;

  std::size_t pos = 0;
  bool first = true;
  while (pos <= task.size()) {
    auto end = task.find('+', pos);
    if (end == std::string_view::npos) end = task.size();
    const auto& t = get(task.substr(pos, end - pos));
    if (first) {
      req.system_prompt = fill(t.system, vars);
      req.user_prompt = fill(t.user, vars);
      first = false;
    } else {
      req.user_prompt += "\n\n" + fill(t.user, vars);
    }
    pos = end + 1;
  }
  return req;
}

}  // namespace are::prompts
