#include "wrapper.hpp"

#include <algorithm>
#include <cctype>

#include "error.hpp"
#include "io.hpp"
#include "text.hpp"

namespace courserec {

namespace fs = std::filesystem;

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Cut points that fall between markup and text or around whitespace.
bool is_boundary(char before, char after) {
  return before == '>' || after == '<' || is_space(before) || is_space(after);
}

std::string common_suffix(const std::vector<std::string_view>& contexts) {
  std::string_view first = contexts.front();
  std::size_t len = first.size();
  for (auto c : contexts) {
    std::size_t n = 0;
    while (n < len && n < c.size() && c[c.size() - 1 - n] == first[first.size() - 1 - n]) ++n;
    len = n;
  }
  return std::string(first.substr(first.size() - len));
}

std::string common_prefix(const std::vector<std::string_view>& contexts) {
  std::string_view first = contexts.front();
  std::size_t len = first.size();
  for (auto c : contexts) {
    std::size_t n = 0;
    while (n < len && n < c.size() && c[n] == first[n]) ++n;
    len = n;
  }
  return std::string(first.substr(0, len));
}

// Tails of the preceding context, shortest first.
std::vector<std::string> prefix_candidates(const std::string& context) {
  std::vector<std::string> out;
  for (std::size_t s = context.size(); s-- > 0;)
    if (s == 0 || is_boundary(context[s - 1], context[s])) out.push_back(context.substr(s));
  return out;
}

// Heads of the following context, shortest first.
std::vector<std::string> suffix_candidates(const std::string& context) {
  std::vector<std::string> out;
  for (std::size_t e = 1; e <= context.size(); ++e)
    if (e == context.size() || is_boundary(context[e - 1], context[e]))
      out.push_back(context.substr(0, e));
  return out;
}

struct Occurrence {
  const LabeledExample* example;
  std::size_t begin;
  std::size_t end;
};

std::vector<Occurrence> locate(std::span<const LabeledExample> examples, const std::string& field) {
  std::vector<Occurrence> out;
  for (const auto& ex : examples) {
    // Repeated identical targets map to successive occurrences.
    std::map<std::string, std::size_t> next_from;
    for (const auto& [f, target] : ex.targets) {
      if (f != field) continue;
      if (target.empty())
        throw Error(ErrorKind::Rule, ex.name + ": empty target for field '" + field + "'");
      std::size_t from = next_from[target];
      std::size_t at = ex.page.find(target, from);
      if (at == std::string::npos)
        throw Error(ErrorKind::Rule,
                    ex.name + ": target for field '" + field + "' not found in page: " + target);
      next_from[target] = at + target.size();
      out.push_back({&ex, at, at + target.size()});
    }
  }
  return out;
}

std::vector<std::string> sorted_targets(const LabeledExample& ex, const std::string& field) {
  std::vector<std::string> out;
  for (const auto& [f, t] : ex.targets)
    if (f == field) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

// Empty when the rule is exact on every page; otherwise a description of the
// first stray or missing capture.
std::string check_rule(std::span<const LabeledExample> examples, const ExtractionRule& rule) {
  for (const auto& ex : examples) {
    auto want = sorted_targets(ex, rule.field);
    auto captures = scan(ex.page, rule);
    std::vector<std::string> got;
    for (const auto& c : captures) got.push_back(c.raw);
    std::sort(got.begin(), got.end());
    if (got == want) continue;
    for (const auto& c : captures) {
      if (!std::binary_search(want.begin(), want.end(), c.raw))
        return ex.name + " bytes [" + std::to_string(c.begin) + "," +
               std::to_string(c.begin + c.raw.size()) + "): '" +
               c.raw.substr(0, std::min<std::size_t>(c.raw.size(), 80)) + "'";
    }
    return ex.name + ": " + std::to_string(got.size()) + " captures for " +
           std::to_string(want.size()) + " targets";
  }
  return {};
}

ExtractionRule learn_field(std::span<const LabeledExample> examples, const std::string& field) {
  auto occurrences = locate(examples, field);
  std::vector<std::string_view> before, after;
  for (const auto& o : occurrences) {
    std::string_view page = o.example->page;
    std::size_t b = o.begin > kMaxContext ? o.begin - kMaxContext : 0;
    before.push_back(page.substr(b, o.begin - b));
    after.push_back(page.substr(o.end, std::min(kMaxContext, page.size() - o.end)));
  }
  std::string left = common_suffix(before);
  std::string right = common_prefix(after);
  if (left.empty())
    throw Error(ErrorKind::Rule, "field '" + field + "': no common context before the targets");
  if (right.empty())
    throw Error(ErrorKind::Rule, "field '" + field + "': no common context after the targets");

  for (const auto& prefix : prefix_candidates(left)) {
    for (const auto& suffix : suffix_candidates(right)) {
      ExtractionRule rule{field, prefix, suffix};
      if (check_rule(examples, rule).empty()) return rule;
    }
  }
  ExtractionRule widest{field, left, right};
  throw Error(ErrorKind::Rule, "field '" + field + "': rule over-matches at " +
                                   check_rule(examples, widest));
}

}  // namespace

std::vector<Capture> scan(std::string_view page, const ExtractionRule& rule,
                          std::vector<std::string>* warnings) {
  std::vector<Capture> out;
  if (rule.prefix.empty() || rule.suffix.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    std::size_t p = page.find(rule.prefix, pos);
    if (p == std::string_view::npos) break;
    std::size_t start = p + rule.prefix.size();
    std::size_t limit = std::min(page.size(), start + kCaptureWindow + rule.suffix.size());
    std::size_t s = page.substr(0, limit).find(rule.suffix, start);
    if (s == std::string_view::npos) {
      if (warnings)
        warnings->push_back("field '" + rule.field + "': no suffix within " +
                            std::to_string(kCaptureWindow) + " bytes of offset " +
                            std::to_string(start) + ", skipped");
      pos = p + 1;
      continue;
    }
    out.push_back({start, std::string(page.substr(start, s - start))});
    pos = s + rule.suffix.size();
  }
  return out;
}

std::vector<ExtractionRule> learn_rules(std::span<const LabeledExample> examples) {
  if (examples.empty()) throw Error(ErrorKind::Rule, "no training examples");
  std::vector<std::string> fields;
  for (const auto& ex : examples)
    for (const auto& [f, t] : ex.targets)
      if (std::find(fields.begin(), fields.end(), f) == fields.end()) fields.push_back(f);
  if (std::find(fields.begin(), fields.end(), "title") == fields.end())
    throw Error(ErrorKind::Rule, "training examples must label the title field");
  std::sort(fields.begin(), fields.end());
  std::vector<ExtractionRule> rules;
  for (const auto& f : fields) rules.push_back(learn_field(examples, f));
  return rules;
}

std::vector<ExtractedRecord> apply_rules(std::span<const ExtractionRule> rules,
                                         std::string_view page, const std::string& source_url,
                                         std::vector<std::string>* warnings) {
  struct Match {
    std::size_t begin;
    const std::string* field;
    std::string text;
  };
  std::vector<Match> matches;
  bool has_title = false;
  for (const auto& rule : rules) {
    has_title = has_title || rule.field == "title";
    for (auto& c : scan(page, rule, warnings))
      matches.push_back({c.begin, &rule.field, strip_markup(c.raw)});
  }
  if (!has_title) throw Error(ErrorKind::Rule, "rule set has no title rule");
  std::stable_sort(matches.begin(), matches.end(),
                   [](const Match& a, const Match& b) { return a.begin < b.begin; });

  std::map<std::string, std::string> page_fields;
  std::vector<std::map<std::string, std::string>> records;
  for (auto& m : matches) {
    if (*m.field == "title") {
      records.push_back({{"title", m.text}});
    } else if (records.empty()) {
      page_fields.try_emplace(*m.field, m.text);
    } else {
      records.back().try_emplace(*m.field, m.text);
    }
  }

  std::vector<ExtractedRecord> out;
  for (auto& fields : records) {
    for (auto& [k, v] : page_fields) fields.try_emplace(k, v);
    ExtractedRecord r;
    r.title = fields["title"];
    if (r.title.empty()) continue;
    r.provider = fields["provider"];
    r.description = fields["description"];
    r.source_url = source_url;
    out.push_back(std::move(r));
  }
  return out;
}

std::string strip_markup(std::string_view raw) {
  std::string text;
  text.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '<') {
      std::size_t close = raw.find('>', i);
      if (close == std::string_view::npos) break;
      i = close;
      continue;
    }
    if (raw[i] == '&') {
      std::size_t semi = raw.find(';', i);
      if (semi != std::string_view::npos && semi - i <= 8) {
        std::string_view ent = raw.substr(i + 1, semi - i - 1);
        std::string rep;
        if (ent == "amp") rep = "&";
        else if (ent == "lt") rep = "<";
        else if (ent == "gt") rep = ">";
        else if (ent == "quot") rep = "\"";
        else if (ent == "apos" || ent == "#39" || ent == "#x27") rep = "'";
        else if (ent == "nbsp") rep = " ";
        else if (ent.size() > 1 && ent[0] == '#' && std::isdigit(static_cast<unsigned char>(ent[1]))) {
          long code = std::strtol(std::string(ent.substr(1)).c_str(), nullptr, 10);
          if (code > 0 && code < 128) rep = std::string(1, static_cast<char>(code));
        }
        if (!rep.empty()) {
          text += rep;
          i = semi;
          continue;
        }
      }
    }
    text.push_back(raw[i]);
  }
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// --- corpus -------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> tsv_rows(const fs::path& path, std::size_t columns) {
  std::vector<std::vector<std::string>> rows;
  int n = 0;
  for (auto& line : split(read_file(path), '\n')) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != columns)
      throw Error(ErrorKind::Format, path.string() + " line " + std::to_string(n) + ": expected " +
                                         std::to_string(columns) + " tab-separated columns");
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace

ProviderCorpus load_provider_corpus(const fs::path& dir) {
  ProviderCorpus c;
  c.name = dir.filename().string();
  if (c.name.empty()) c.name = dir.parent_path().filename().string();
  fs::path pages = dir / "pages";
  if (!fs::is_directory(pages)) throw Error(ErrorKind::Io, "missing pages directory in " + dir.string());
  for (const auto& e : fs::directory_iterator(pages))
    if (e.is_regular_file()) c.pages.emplace(e.path().filename().string(), read_file(e.path()));
  if (fs::exists(dir / "manifest.tsv"))
    for (auto& row : tsv_rows(dir / "manifest.tsv", 2)) c.urls[row[0]] = row[1];
  if (fs::exists(dir / "examples.tsv")) {
    std::map<std::string, LabeledExample> by_file;
    std::vector<std::string> order;
    for (auto& row : tsv_rows(dir / "examples.tsv", 3)) {
      auto page = c.pages.find(row[0]);
      if (page == c.pages.end())
        throw Error(ErrorKind::Format, "examples.tsv names unknown page " + row[0]);
      auto [it, fresh] = by_file.try_emplace(row[0]);
      if (fresh) {
        it->second.name = c.name + "/" + row[0];
        it->second.page = page->second;
        order.push_back(row[0]);
      }
      it->second.targets.emplace_back(row[1], row[2]);
    }
    for (auto& f : order) c.examples.push_back(std::move(by_file[f]));
  }
  return c;
}

std::vector<fs::path> provider_dirs(const fs::path& corpus) {
  if (!fs::is_directory(corpus)) throw Error(ErrorKind::Io, "not a directory: " + corpus.string());
  if (fs::is_directory(corpus / "pages")) return {corpus};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(corpus))
    if (e.is_directory() && fs::is_directory(e.path() / "pages")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(ErrorKind::Io, "no provider directories under " + corpus.string());
  return out;
}

}  // namespace courserec
