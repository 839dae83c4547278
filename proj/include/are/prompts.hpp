#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "are/providers.hpp"

// Prompt templates live as versioned text assets under assets/prompts and are
// compiled into the library. A template has an optional system part and a
// user part; `{{name}}` placeholders are filled from a JSON object of strings.
//
// A task name may chain a suffix template with '+', e.g. "decompose+json_repair":
// the system part comes from the first template and the user parts are
// concatenated with a blank line.
namespace are::prompts {

struct Template {
  std::string name;
  int version = 0;
  std::string system;
  std::string user;
};

/// Throws PreconditionError for an unknown template.
const Template& get(std::string_view name);

std::vector<std::string> names();

/// Parses the asset format (`@version N`, `@system`, `@user` sections).
Template parse(std::string_view name, std::string_view source);

/// Placeholder substitution. Missing variables throw PreconditionError.
std::string fill(std::string_view tmpl, const Json& vars);

ChatRequest render(std::string_view task, const Json& vars, int max_output_tokens = 512,
                   double temperature = 0.0);

}  // namespace are::prompts
