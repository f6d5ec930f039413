#include "text.hpp"

#include <cctype>

namespace courserec {

namespace {

bool is_token_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string normalize_token(std::string_view token) {
  std::string t;
  t.reserve(token.size());
  for (char c : token) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  // Plural stripping: sibilant stems drop "es" (boxes, processes, switches),
  // everything else drops a single "s". Words ending in ss/us/is and short
  // words are left alone (process, bus, analysis, gas).
  if (t.size() > 4 && (ends_with(t, "sses") || ends_with(t, "xes") || ends_with(t, "ches") ||
                       ends_with(t, "shes") || ends_with(t, "zes"))) {
    t.resize(t.size() - 2);
  } else if (t.size() > 3 && ends_with(t, "s") && !ends_with(t, "ss") && !ends_with(t, "us") &&
             !ends_with(t, "is")) {
    t.pop_back();
  }
  return t;
}

std::vector<std::string> normalized_tokens(std::string_view text) {
  auto tokens = tokenize(text);
  for (auto& t : tokens) t = normalize_token(t);
  return tokens;
}

std::string normalize_phrase(std::string_view text) {
  std::string out;
  for (const auto& t : normalized_tokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace courserec
