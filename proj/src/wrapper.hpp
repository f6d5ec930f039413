#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace courserec {

// A training page with the exact substrings to extract, per field, in
// document order. Every record on the page must be labelled.
struct LabeledExample {
  std::string name;
  std::string page;
  std::vector<std::pair<std::string, std::string>> targets;  // (field, raw substring)
};

struct ExtractionRule {
  std::string field;
  std::string prefix;
  std::string suffix;

  bool operator==(const ExtractionRule&) const = default;
};

struct ExtractedRecord {
  std::string provider;
  std::string title;
  std::string description;
  std::string source_url;

  bool operator==(const ExtractedRecord&) const = default;
};

inline constexpr std::size_t kMaxContext = 64;
inline constexpr std::size_t kCaptureWindow = 16 * 1024;

// One rule per labelled field. Throws Error{Rule} when the shared context is
// empty or when no prefix/suffix pair extracts exactly the labelled targets.
std::vector<ExtractionRule> learn_rules(std::span<const LabeledExample> examples);

struct Capture {
  std::size_t begin = 0;  // offset of the captured bytes
  std::string raw;
};

// Left-to-right scan: each prefix occurrence captures up to the next suffix
// within the capture window. Misses are reported through `warnings`.
std::vector<Capture> scan(std::string_view page, const ExtractionRule& rule,
                          std::vector<std::string>* warnings = nullptr);

// A new record starts at every title match; other fields attach to the
// current record. Fields seen before the first title apply to every record on
// the page.
std::vector<ExtractedRecord> apply_rules(std::span<const ExtractionRule> rules,
                                         std::string_view page, const std::string& source_url,
                                         std::vector<std::string>* warnings = nullptr);

// Drops tags, decodes common entities and collapses whitespace.
std::string strip_markup(std::string_view raw);

// corpus/<provider>/{pages/*.html, manifest.tsv, examples.tsv}
struct ProviderCorpus {
  std::string name;                          // directory name
  std::map<std::string, std::string> pages;  // file name -> content
  std::map<std::string, std::string> urls;   // file name -> source url
  std::vector<LabeledExample> examples;
};

ProviderCorpus load_provider_corpus(const std::filesystem::path& dir);

// A provider directory, or a directory of provider directories.
std::vector<std::filesystem::path> provider_dirs(const std::filesystem::path& corpus);

}  // namespace courserec
