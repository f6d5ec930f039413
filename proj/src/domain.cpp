#include "domain.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"
#include "io.hpp"
#include "text.hpp"

namespace courserec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Discipline d) {
  switch (d) {
    case Discipline::Electrical: return "electrical";
    case Discipline::Mechanical: return "mechanical";
    case Discipline::Both: return "both";
  }
  return "both";
}

Discipline parse_discipline(std::string_view s) {
  if (s == "electrical") return Discipline::Electrical;
  if (s == "mechanical") return Discipline::Mechanical;
  if (s == "both") return Discipline::Both;
  throw Error(ErrorKind::Validation, "unknown discipline '" + std::string(s) + "'", "discipline");
}

std::string_view to_string(Experience e) {
  switch (e) {
    case Experience::Junior: return "junior";
    case Experience::Intermediate: return "intermediate";
    case Experience::Senior: return "senior";
    case Experience::Management: return "management";
  }
  return "junior";
}

Experience parse_experience(std::string_view s) {
  if (s == "junior" || s == "1") return Experience::Junior;
  if (s == "intermediate" || s == "2") return Experience::Intermediate;
  if (s == "senior" || s == "3") return Experience::Senior;
  if (s == "management" || s == "4") return Experience::Management;
  throw Error(ErrorKind::Validation, "unknown experience level '" + std::string(s) + "'",
              "experience");
}

namespace {

int parse_int(std::string_view s, const std::string& what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorKind::Format, "bad integer '" + std::string(s) + "' for " + what);
  return v;
}

// Non-empty, non-comment lines with their 1-based line numbers.
std::vector<std::pair<int, std::string>> data_lines(std::string_view text) {
  std::vector<std::pair<int, std::string>> out;
  int n = 0;
  for (auto& line : split(text, '\n')) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    out.emplace_back(n, std::move(line));
  }
  return out;
}

std::vector<int> parse_id_list(std::string_view s, const std::string& what) {
  std::vector<int> out;
  if (trim(s).empty()) return out;
  for (const auto& part : split(s, ',')) out.push_back(parse_int(trim(part), what));
  return out;
}

std::string join_ids(std::span<const int> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

// --- Vocabulary ---------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<VocabularyEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    if (e.id != static_cast<TermId>(i + 1))
      throw Error(ErrorKind::Format, "vocabulary ids must be contiguous from 1; found id " +
                                         std::to_string(e.id) + " at position " +
                                         std::to_string(i + 1));
    if (e.id > kMaxId)
      throw Error(ErrorKind::Format, "vocabulary id " + std::to_string(e.id) + " exceeds 255");
    e.normalized = normalize_phrase(e.term);
    if (e.normalized.empty())
      throw Error(ErrorKind::Format, "vocabulary term " + std::to_string(e.id) + " is empty");
    if (!by_term_.emplace(e.normalized, e.id).second)
      throw Error(ErrorKind::Format, "duplicate vocabulary term '" + e.term + "'");
    max_tokens_ = std::max(max_tokens_, split(e.normalized, ' ').size());
  }
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::vector<VocabularyEntry> entries;
  std::set<int> seen;
  for (const auto& [n, line] : data_lines(text)) {
    auto f = split(line, '\t');
    if (f.size() != 3)
      throw Error(ErrorKind::Format, "vocabulary line " + std::to_string(n) +
                                         ": expected id<TAB>term<TAB>discipline");
    VocabularyEntry e;
    e.id = parse_int(f[0], "vocabulary id on line " + std::to_string(n));
    if (e.id < 1 || e.id > kMaxId)
      throw Error(ErrorKind::Format, "vocabulary line " + std::to_string(n) + ": id " +
                                         std::to_string(e.id) + " outside 1..255");
    if (!seen.insert(e.id).second)
      throw Error(ErrorKind::Format, "vocabulary line " + std::to_string(n) + ": duplicate id " +
                                         std::to_string(e.id));
    e.term = trim(f[1]);
    try {
      e.discipline = parse_discipline(trim(f[2]));
    } catch (const Error&) {
      throw Error(ErrorKind::Format, "vocabulary line " + std::to_string(n) + ": bad discipline");
    }
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return Vocabulary(std::move(entries));
}

Vocabulary Vocabulary::load(const fs::path& path) { return parse(read_file(path)); }

const VocabularyEntry& Vocabulary::at(TermId id) const {
  if (!contains(id)) throw Error(ErrorKind::NotFound, "unknown vocabulary id " + std::to_string(id));
  return entries_[static_cast<std::size_t>(id - 1)];
}

std::optional<TermId> Vocabulary::find(std::string_view normalized) const {
  auto it = by_term_.find(std::string(normalized));
  if (it == by_term_.end()) return std::nullopt;
  return it->second;
}

// --- IdTable ------------------------------------------------------------------

IdTable IdTable::parse(std::string_view text) {
  std::vector<std::pair<int, std::string>> rows;
  for (const auto& [n, line] : data_lines(text)) {
    auto f = split(line, '\t');
    if (f.size() != 2)
      throw Error(ErrorKind::Format, "table line " + std::to_string(n) + ": expected id<TAB>label");
    rows.emplace_back(parse_int(f[0], "table id on line " + std::to_string(n)), trim(f[1]));
  }
  std::sort(rows.begin(), rows.end());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<int>(i + 1))
      throw Error(ErrorKind::Format, "table ids must be unique and contiguous from 1");
    labels.push_back(rows[i].second);
  }
  return IdTable(std::move(labels));
}

IdTable IdTable::load(const fs::path& path) { return parse(read_file(path)); }

Catalog Catalog::load(const fs::path& dir) {
  Catalog c;
  c.vocabulary = Vocabulary::load(dir / "vocab.tsv");
  c.goals = IdTable::load(dir / "tables" / "goals.tsv");
  c.interests = IdTable::load(dir / "tables" / "interests.tsv");
  return c;
}

// --- validation ---------------------------------------------------------------

void validate(const UserProfile& p, const Catalog& catalog) {
  if (p.discipline == Discipline::Both)
    throw Error(ErrorKind::Validation, "discipline must be electrical or mechanical", "discipline");
  const auto& pro = p.professional_interests;
  if (pro.empty() || pro.size() > 5)
    throw Error(ErrorKind::Validation, "professional_interests must hold 1 to 5 keyword ids",
                "professional_interests");
  std::set<TermId> seen;
  for (TermId id : pro) {
    if (!catalog.vocabulary.contains(id))
      throw Error(ErrorKind::Validation, "unknown keyword id " + std::to_string(id),
                  "professional_interests");
    if (!seen.insert(id).second)
      throw Error(ErrorKind::Validation, "duplicate keyword id " + std::to_string(id),
                  "professional_interests");
  }
  std::set<int> pis;
  for (int id : p.personal_interests) {
    if (!catalog.interests.contains(id))
      throw Error(ErrorKind::Validation, "unknown personal interest id " + std::to_string(id),
                  "personal_interests");
    if (!pis.insert(id).second)
      throw Error(ErrorKind::Validation, "duplicate personal interest id " + std::to_string(id),
                  "personal_interests");
  }
  int exp = static_cast<int>(p.experience);
  if (exp < 1 || exp > 4)
    throw Error(ErrorKind::Validation, "experience must be 1..4", "experience");
  if (!catalog.goals.contains(p.short_goal))
    throw Error(ErrorKind::Validation, "unknown goal id " + std::to_string(p.short_goal),
                "short_goal");
  if (!catalog.goals.contains(p.long_goal))
    throw Error(ErrorKind::Validation, "unknown goal id " + std::to_string(p.long_goal),
                "long_goal");
}

void validate(const Course& c, const Vocabulary& vocab) {
  if (trim(c.provider).empty())
    throw Error(ErrorKind::Validation, "provider must not be empty", "provider");
  if (trim(c.title).empty()) throw Error(ErrorKind::Validation, "title must not be empty", "title");
  if (c.keywords.size() > kKeywordSlots)
    throw Error(ErrorKind::Validation, "at most 3 keywords allowed", "keywords");
  std::set<TermId> seen;
  for (TermId id : c.keywords) {
    if (!vocab.contains(id))
      throw Error(ErrorKind::Validation, "unknown keyword id " + std::to_string(id), "keywords");
    if (!seen.insert(id).second)
      throw Error(ErrorKind::Validation, "duplicate keyword id " + std::to_string(id), "keywords");
  }
}

void validate(const SurveyRecord& r, const Catalog& catalog) {
  validate(r.profile, catalog);
  if (r.course_keywords.size() > kKeywordSlots)
    throw Error(ErrorKind::Validation, "at most 3 course keywords allowed", "course_keywords");
  std::set<TermId> seen;
  for (TermId id : r.course_keywords) {
    if (!catalog.vocabulary.contains(id) || !seen.insert(id).second)
      throw Error(ErrorKind::Validation, "bad course keyword id " + std::to_string(id),
                  "course_keywords");
  }
  if (r.rank < 1 || r.rank > 5)
    throw Error(ErrorKind::Validation, "rank must be 1..5", "rank");
}

std::string course_document(const Course& c) {
  if (c.description.empty()) return c.title;
  return c.title + "\n" + c.description;
}

// --- survey lines -------------------------------------------------------------

std::string format_survey_line(const SurveyRecord& r) {
  const auto& p = r.profile;
  std::string out;
  out += to_string(p.discipline);
  out += '\t' + join_ids(p.professional_interests);
  out += '\t' + join_ids(p.personal_interests);
  out += '\t' + std::to_string(static_cast<int>(p.experience));
  out += '\t' + std::to_string(p.short_goal);
  out += '\t' + std::to_string(p.long_goal);
  out += '\t' + join_ids(r.course_keywords);
  out += '\t' + std::to_string(r.rank);
  return out;
}

SurveyRecord parse_survey_line(std::string_view line) {
  auto f = split(line, '\t');
  if (f.size() != 8)
    throw Error(ErrorKind::Format, "survey record needs 8 tab-separated fields, got " +
                                       std::to_string(f.size()));
  SurveyRecord r;
  r.profile.discipline = parse_discipline(f[0]);
  r.profile.professional_interests = parse_id_list(f[1], "professional interests");
  auto pis = parse_id_list(f[2], "personal interests");
  if (pis.size() != 3)
    throw Error(ErrorKind::Format, "survey record needs exactly 3 personal interests");
  std::copy(pis.begin(), pis.end(), r.profile.personal_interests.begin());
  r.profile.experience = parse_experience(f[3]);
  r.profile.short_goal = parse_int(f[4], "short goal");
  r.profile.long_goal = parse_int(f[5], "long goal");
  r.course_keywords = parse_id_list(f[6], "course keywords");
  r.rank = parse_int(f[7], "rank");
  return r;
}

std::vector<SurveyRecord> load_survey_file(const fs::path& path) {
  std::vector<SurveyRecord> out;
  for (const auto& [n, line] : data_lines(read_file(path))) {
    try {
      out.push_back(parse_survey_line(line));
    } catch (const Error& e) {
      throw Error(ErrorKind::Format,
                  path.filename().string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void save_survey_file(const fs::path& path, std::span<const SurveyRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "# discipline\tprofessional\tpersonal\texperience\tshort_goal\tlong_goal\tkeywords\trank\n";
  for (const auto& r : records) out << format_survey_line(r) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

// --- encoders -----------------------------------------------------------------

KeywordBits encode_keywords(std::span<const TermId> keywords) {
  if (keywords.size() > kKeywordSlots)
    throw Error(ErrorKind::Encoding, "at most 3 keywords can be encoded, got " +
                                         std::to_string(keywords.size()));
  std::vector<TermId> sorted(keywords.begin(), keywords.end());
  std::sort(sorted.begin(), sorted.end());
  KeywordBits bits{};
  for (std::size_t slot = 0; slot < sorted.size(); ++slot) {
    TermId id = sorted[slot];
    if (id < 1 || id > 255)
      throw Error(ErrorKind::Encoding, "keyword id " + std::to_string(id) + " does not fit 8 bits");
    for (int b = 0; b < 8; ++b) bits[slot * 8 + b] = static_cast<std::uint8_t>((id >> (7 - b)) & 1);
  }
  return bits;
}

ProfileVector encode_profile(const UserProfile& p, const Catalog& catalog) {
  validate(p, catalog);
  auto goals = static_cast<double>(catalog.goals.size());
  auto interests = static_cast<double>(catalog.interests.size());
  auto pis = p.personal_interests;
  std::sort(pis.begin(), pis.end());
  return {static_cast<double>(static_cast<int>(p.experience)) / 4.0,
          p.short_goal / goals,
          p.long_goal / goals,
          pis[0] / interests,
          pis[1] / interests,
          pis[2] / interests};
}

InputVector input_vector(const UserProfile& p, std::span<const TermId> course_keywords,
                         const Catalog& catalog) {
  InputVector x{};
  auto bits = encode_keywords(course_keywords);
  std::copy(bits.begin(), bits.end(), x.begin());
  auto prof = encode_profile(p, catalog);
  std::copy(prof.begin(), prof.end(), x.begin() + kKeywordBits);
  return x;
}

// --- json ---------------------------------------------------------------------

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::Validation, std::string("missing field '") + key + "'", key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Validation, std::string("field '") + key + "' has the wrong type", key);
  }
}

}  // namespace

json profile_to_json(const UserProfile& p) {
  json j;
  if (!p.user_id.empty()) j["user_id"] = p.user_id;
  j["discipline"] = to_string(p.discipline);
  j["professional_interests"] = p.professional_interests;
  j["personal_interests"] = p.personal_interests;
  j["experience"] = to_string(p.experience);
  j["short_goal"] = p.short_goal;
  j["long_goal"] = p.long_goal;
  return j;
}

UserProfile profile_from_json(const json& j) {
  UserProfile p;
  if (j.is_object() && j.contains("user_id") && j["user_id"].is_string())
    p.user_id = j["user_id"].get<std::string>();
  p.discipline = parse_discipline(required<std::string>(j, "discipline"));
  p.professional_interests = required<std::vector<int>>(j, "professional_interests");
  auto pis = required<std::vector<int>>(j, "personal_interests");
  if (pis.size() != 3)
    throw Error(ErrorKind::Validation, "personal_interests must hold exactly 3 ids",
                "personal_interests");
  std::copy(pis.begin(), pis.end(), p.personal_interests.begin());
  if (!j.contains("experience"))
    throw Error(ErrorKind::Validation, "missing field 'experience'", "experience");
  const auto& exp = j.at("experience");
  if (exp.is_number_integer())
    p.experience = parse_experience(std::to_string(exp.get<int>()));
  else
    p.experience = parse_experience(required<std::string>(j, "experience"));
  p.short_goal = required<int>(j, "short_goal");
  p.long_goal = required<int>(j, "long_goal");
  return p;
}

json course_to_json(const Course& c) {
  json j;
  j["course_id"] = c.course_id;
  j["provider"] = c.provider;
  j["title"] = c.title;
  j["description"] = c.description;
  j["discipline"] = to_string(c.discipline);
  j["keywords"] = c.keywords;
  if (c.source_url) j["source_url"] = *c.source_url;
  return j;
}

Course course_from_json(const json& j) {
  Course c;
  if (j.is_object() && j.contains("course_id") && j["course_id"].is_string())
    c.course_id = j["course_id"].get<std::string>();
  c.provider = required<std::string>(j, "provider");
  c.title = required<std::string>(j, "title");
  if (j.contains("description")) c.description = required<std::string>(j, "description");
  if (j.contains("discipline")) c.discipline = parse_discipline(required<std::string>(j, "discipline"));
  if (j.contains("keywords")) c.keywords = required<std::vector<int>>(j, "keywords");
  if (j.contains("source_url") && !j["source_url"].is_null())
    c.source_url = required<std::string>(j, "source_url");
  return c;
}

json survey_to_json(const SurveyRecord& r) {
  json j = profile_to_json(r.profile);
  j["course_keywords"] = r.course_keywords;
  j["rank"] = r.rank;
  return j;
}

SurveyRecord survey_from_json(const json& j) {
  SurveyRecord r;
  r.profile = profile_from_json(j);
  r.course_keywords = required<std::vector<int>>(j, "course_keywords");
  r.rank = required<int>(j, "rank");
  return r;
}

}  // namespace courserec
