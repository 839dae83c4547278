#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by every module. All functions are pure.
namespace are::text {

/// Splits on Unicode whitespace (UTF-8 aware). Punctuation stays attached.
std::vector<std::string> split_words(std::string_view s);

/// Collapses whitespace runs to a single ASCII space and trims both ends.
std::string normalize_ws(std::string_view s);

std::string trim(std::string_view s);

/// ASCII lower-casing; non-ASCII bytes pass through unchanged.
std::string casefold(std::string_view s);

/// Words lower-cased with leading/trailing ASCII punctuation stripped; empties dropped.
std::vector<std::string> content_words(std::string_view s);

/// Sentence split on ". ", "? ", "! " (terminator kept with its sentence).
/// Joining the result with single spaces reproduces normalize_ws(s).
std::vector<std::string> split_sentences(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);

/// 64-bit FNV-1a. Stable across platforms; used for fixture keys and hashed features.
std::uint64_t fnv1a64(std::string_view s);

std::string hex64(std::uint64_t v);

/// Replaces every occurrence of `from` (non-empty) with `to`.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace are::text
