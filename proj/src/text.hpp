#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace courserec {

// Splits on whitespace and punctuation. A token is a maximal run of ASCII
// alphanumerics or non-ASCII bytes.
std::vector<std::string> tokenize(std::string_view text);

// Case-fold and plural-strip a single token.
std::string normalize_token(std::string_view token);

// tokenize + normalize_token on every token.
std::vector<std::string> normalized_tokens(std::string_view text);

// Normalized tokens joined by single spaces. Used as the matching key for
// vocabulary terms.
std::string normalize_phrase(std::string_view text);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace courserec
