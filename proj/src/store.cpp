#include "store.hpp"

#include <cstdio>
#include <sstream>

#include "error.hpp"
#include "io.hpp"
#include "keyphrase.hpp"
#include "ranker.hpp"
#include "text.hpp"

namespace courserec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw Error(ErrorKind::Validation, "split must be train or test", "split");
}

namespace {

// Text files are stored with exactly one trailing newline so that snapshot
// line counts round-trip.
std::string normalize_text(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  if (!s.empty()) s.push_back('\n');
  return s;
}

std::shared_ptr<const Catalog> parse_catalog(const CatalogTexts& t) {
  auto c = std::make_shared<Catalog>();
  c->vocabulary = Vocabulary::parse(t.vocab);
  c->goals = IdTable::parse(t.goals);
  c->interests = IdTable::parse(t.interests);
  return c;
}

std::string make_id(char prefix, std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06llu", prefix, static_cast<unsigned long long>(n));
  return buf;
}

json user_to_json(const UserRecord& u) {
  json j = profile_to_json(u.profile);
  j["token"] = u.token;
  return j;
}

UserRecord user_from_json(const json& j) {
  UserRecord u;
  u.profile = profile_from_json(j);
  if (u.profile.user_id.empty()) throw Error(ErrorKind::Format, "user record without user_id");
  if (j.contains("token")) u.token = j.at("token").get<std::string>();
  return u;
}

json survey_entry_to_json(const SurveyEntry& e) {
  json j = survey_to_json(e.record);
  j["split"] = to_string(e.split);
  return j;
}

SurveyEntry survey_entry_from_json(const json& j) {
  SurveyEntry e;
  e.record = survey_from_json(j);
  e.split = parse_split(j.value("split", "train"));
  return e;
}

std::string dump_line(const json& j) { return j.dump() + "\n"; }

std::string users_text(const StoreState& s) {
  std::string out;
  for (const auto& [id, u] : s.users) out += dump_line(user_to_json(u));
  return out;
}

std::string courses_text(const StoreState& s) {
  std::string out;
  for (const auto& [id, c] : s.courses) out += dump_line(course_to_json(c));
  return out;
}

std::string survey_text(const StoreState& s) {
  std::string out;
  for (const auto& e : s.survey) out += dump_line(survey_entry_to_json(e));
  return out;
}

std::string meta_text(const StoreState& s) {
  json j;
  j["revision"] = s.revision;
  j["next_user"] = s.next_user;
  j["next_course"] = s.next_course;
  return j.dump(2) + "\n";
}

template <class F>
void for_each_json_line(const fs::path& path, F&& fn) {
  if (!fs::exists(path)) return;
  auto lines = split(read_file(path), '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      fn(json::parse(lines[i]));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Format, path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

void index_course_key(StoreState& s, const Course& c) {
  s.course_keys[{c.provider, c.title}] = c.course_id;
}

}  // namespace

CatalogTexts CatalogTexts::load(const fs::path& dir) {
  return {normalize_text(read_file(dir / "vocab.tsv")),
          normalize_text(read_file(dir / "tables" / "goals.tsv")),
          normalize_text(read_file(dir / "tables" / "interests.tsv"))};
}

// --- StoreState -----------------------------------------------------------------

const UserRecord* StoreState::find_user(const std::string& id) const {
  auto it = users.find(id);
  return it == users.end() ? nullptr : &it->second;
}

const Course* StoreState::find_course(const std::string& id) const {
  auto it = courses.find(id);
  return it == courses.end() ? nullptr : &it->second;
}

const Course* StoreState::find_course(const std::string& provider, const std::string& title) const {
  auto it = course_keys.find({provider, title});
  return it == course_keys.end() ? nullptr : find_course(it->second);
}

std::vector<std::string> validate_store(const StoreState& s) {
  std::vector<std::string> problems;
  if (!s.catalog) {
    problems.push_back("no catalog");
    return problems;
  }
  for (const auto& [id, u] : s.users) {
    if (id != u.profile.user_id) problems.push_back("user " + id + ": key does not match user_id");
    try {
      validate(u.profile, *s.catalog);
    } catch (const Error& e) {
      problems.push_back("user " + id + ": " + e.what());
    }
  }
  for (const auto& [id, c] : s.courses) {
    if (id != c.course_id) problems.push_back("course " + id + ": key does not match course_id");
    try {
      validate(c, s.catalog->vocabulary);
    } catch (const Error& e) {
      problems.push_back("course " + id + ": " + e.what());
    }
    auto key = s.course_keys.find({c.provider, c.title});
    if (key == s.course_keys.end() || key->second != id)
      problems.push_back("course " + id + ": (provider, title) index out of date");
  }
  if (s.course_keys.size() != s.courses.size())
    problems.push_back("(provider, title) index has " + std::to_string(s.course_keys.size()) +
                       " entries for " + std::to_string(s.courses.size()) + " courses");
  for (std::size_t i = 0; i < s.survey.size(); ++i) {
    try {
      validate(s.survey[i].record, *s.catalog);
    } catch (const Error& e) {
      problems.push_back("survey record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return problems;
}

// --- Batch ----------------------------------------------------------------------

std::string Batch::upsert_user(UserProfile p, std::optional<std::string> token) {
  if (p.user_id.empty()) {
    do p.user_id = make_id('u', s_.next_user++);
    while (s_.users.count(p.user_id));
  }
  validate(p, *s_.catalog);
  auto it = s_.users.find(p.user_id);
  if (it == s_.users.end()) {
    s_.users.emplace(p.user_id, UserRecord{p, token.value_or("")});
  } else {
    it->second.profile = p;
    if (token) it->second.token = *token;
  }
  users_ = true;
  return p.user_id;
}

std::string Batch::upsert_course(Course c) {
  validate(c, s_.catalog->vocabulary);
  const Course* holder = s_.find_course(c.provider, c.title);
  if (c.course_id.empty() || !s_.courses.count(c.course_id)) {
    if (holder)
      throw Error(ErrorKind::Conflict,
                  "course '" + c.title + "' from '" + c.provider + "' already exists as " +
                      holder->course_id,
                  "title");
    if (c.course_id.empty()) {
      do c.course_id = make_id('c', s_.next_course++);
      while (s_.courses.count(c.course_id));
    }
  } else {
    if (holder && holder->course_id != c.course_id)
      throw Error(ErrorKind::Conflict,
                  "(provider, title) already used by " + holder->course_id, "title");
    const Course& old = s_.courses.at(c.course_id);
    s_.course_keys.erase({old.provider, old.title});
  }
  index_course_key(s_, c);
  s_.courses[c.course_id] = c;
  courses_ = true;
  return c.course_id;
}

void Batch::delete_course(const std::string& course_id) {
  auto it = s_.courses.find(course_id);
  if (it == s_.courses.end()) throw Error(ErrorKind::NotFound, "no course " + course_id, "course_id");
  s_.course_keys.erase({it->second.provider, it->second.title});
  s_.courses.erase(it);
  courses_ = true;
}

void Batch::set_survey(std::vector<SurveyEntry> survey) {
  for (std::size_t i = 0; i < survey.size(); ++i) {
    try {
      validate(survey[i].record, *s_.catalog);
    } catch (const Error& e) {
      throw Error(ErrorKind::Validation,
                  "survey record " + std::to_string(i + 1) + ": " + e.what(), e.field());
    }
  }
  s_.survey = std::move(survey);
  survey_ = true;
}

void Batch::set_nb_checkpoint(std::string text) {
  load_nb_model(text);  // reject anything that does not parse
  s_.nb_checkpoint = normalize_text(std::move(text));
  nb_ = true;
}

void Batch::set_ranker_checkpoint(std::string text) {
  load_mlp_model(text);
  s_.ranker_checkpoint = normalize_text(std::move(text));
  ranker_ = true;
}

// --- Store ------------------------------------------------------------------------

Store::Store(CatalogTexts catalog) {
  auto s = std::make_shared<StoreState>();
  s->catalog_text = {normalize_text(catalog.vocab), normalize_text(catalog.goals),
                     normalize_text(catalog.interests)};
  s->catalog = parse_catalog(s->catalog_text);
  current_ = std::move(s);
}

std::unique_ptr<Store> Store::open(const fs::path& dir) {
  auto s = std::make_shared<StoreState>();
  s->catalog_text = CatalogTexts::load(dir);
  s->catalog = parse_catalog(s->catalog_text);
  for_each_json_line(dir / "users.jsonl", [&](const json& j) {
    auto u = user_from_json(j);
    if (!s->users.emplace(u.profile.user_id, u).second)
      throw Error(ErrorKind::Format, "duplicate user " + u.profile.user_id);
  });
  for_each_json_line(dir / "courses.jsonl", [&](const json& j) {
    auto c = course_from_json(j);
    if (c.course_id.empty()) throw Error(ErrorKind::Format, "course record without course_id");
    if (!s->courses.emplace(c.course_id, c).second)
      throw Error(ErrorKind::Format, "duplicate course " + c.course_id);
    if (s->find_course(c.provider, c.title))
      throw Error(ErrorKind::Format, "duplicate (provider, title) for " + c.course_id);
    index_course_key(*s, c);
  });
  for_each_json_line(dir / "survey.jsonl", [&](const json& j) { s->survey.push_back(survey_entry_from_json(j)); });
  if (fs::exists(dir / "models" / "nb.ckpt")) {
    s->nb_checkpoint = normalize_text(read_file(dir / "models" / "nb.ckpt"));
    load_nb_model(*s->nb_checkpoint);
  }
  if (fs::exists(dir / "models" / "ranker.ckpt")) {
    s->ranker_checkpoint = normalize_text(read_file(dir / "models" / "ranker.ckpt"));
    load_mlp_model(*s->ranker_checkpoint);
  }
  if (fs::exists(dir / "meta.json")) {
    try {
      json meta = json::parse(read_file(dir / "meta.json"));
      s->revision = meta.at("revision").get<std::uint64_t>();
      s->next_user = meta.at("next_user").get<std::uint64_t>();
      s->next_course = meta.at("next_course").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Format, (dir / "meta.json").string() + ": " + e.what());
    }
  }
  auto problems = validate_store(*s);
  if (!problems.empty())
    throw Error(ErrorKind::Format, dir.string() + ": " + problems.front());
  std::unique_ptr<Store> store(new Store());
  store->dir_ = dir;
  store->current_ = std::move(s);
  return store;
}

std::unique_ptr<Store> Store::create(const fs::path& dir, const CatalogTexts& catalog) {
  if (fs::exists(dir / "vocab.tsv") || fs::exists(dir / "meta.json"))
    throw Error(ErrorKind::Conflict, dir.string() + " already holds a data directory");
  Store probe(catalog);  // parse before writing anything
  const auto& t = probe.view()->catalog_text;
  write_file_atomic(dir / "vocab.tsv", t.vocab);
  write_file_atomic(dir / "tables" / "goals.tsv", t.goals);
  write_file_atomic(dir / "tables" / "interests.tsv", t.interests);
  write_file_atomic(dir / "meta.json", meta_text(*probe.view()));
  return open(dir);
}

std::shared_ptr<const StoreState> Store::view() const {
  std::lock_guard lock(view_mutex_);
  return current_;
}

void Store::publish(std::shared_ptr<const StoreState> s) {
  std::lock_guard lock(view_mutex_);
  current_ = std::move(s);
}

void Store::persist(const StoreState& s, const Batch* dirty) {
  if (!dir_) return;
  const fs::path& d = *dir_;
  std::vector<std::pair<fs::path, std::string>> files;
  bool all = dirty == nullptr;
  if (all) {
    files.emplace_back(d / "vocab.tsv", s.catalog_text.vocab);
    files.emplace_back(d / "tables" / "goals.tsv", s.catalog_text.goals);
    files.emplace_back(d / "tables" / "interests.tsv", s.catalog_text.interests);
  }
  if (all || dirty->users_) files.emplace_back(d / "users.jsonl", users_text(s));
  if (all || dirty->courses_) files.emplace_back(d / "courses.jsonl", courses_text(s));
  if (all || dirty->survey_) files.emplace_back(d / "survey.jsonl", survey_text(s));
  if ((all || dirty->nb_) && s.nb_checkpoint) files.emplace_back(d / "models" / "nb.ckpt", *s.nb_checkpoint);
  if ((all || dirty->ranker_) && s.ranker_checkpoint)
    files.emplace_back(d / "models" / "ranker.ckpt", *s.ranker_checkpoint);
  // meta.json last: its revision marks the batch as complete.
  files.emplace_back(d / "meta.json", meta_text(s));

  std::vector<fs::path> staged;
  try {
    for (const auto& [path, content] : files) staged.push_back(write_temp_file(path, content));
  } catch (...) {
    std::error_code ec;
    for (const auto& tmp : staged) fs::remove(tmp, ec);
    throw;
  }
  if (all) {
    std::error_code ec;
    if (!s.nb_checkpoint) fs::remove(d / "models" / "nb.ckpt", ec);
    if (!s.ranker_checkpoint) fs::remove(d / "models" / "ranker.ckpt", ec);
  }
  for (std::size_t i = 0; i < files.size(); ++i) replace_file(staged[i], files[i].first);
}

std::uint64_t Store::commit(const std::function<void(Batch&)>& fn) {
  std::lock_guard lock(writer_);
  auto next = std::make_shared<StoreState>(*current_);
  Batch batch(*next);
  fn(batch);
  if (!batch.changed()) return current_->revision;
  next->revision = current_->revision + 1;
  auto problems = validate_store(*next);
  if (!problems.empty()) throw Error(ErrorKind::Internal, "integrity check failed: " + problems.front());
  persist(*next, &batch);
  std::uint64_t rev = next->revision;
  publish(std::move(next));
  return rev;
}

std::string Store::upsert_user(UserProfile p, std::optional<std::string> token) {
  std::string id;
  commit([&](Batch& b) { id = b.upsert_user(std::move(p), std::move(token)); });
  return id;
}

std::string Store::upsert_course(Course c) {
  std::string id;
  commit([&](Batch& b) { id = b.upsert_course(std::move(c)); });
  return id;
}

void Store::delete_course(const std::string& course_id) {
  commit([&](Batch& b) { b.delete_course(course_id); });
}

// --- snapshots ----------------------------------------------------------------------

namespace {

constexpr std::string_view kSnapshotMagic = "courserec-snapshot 1";

void put_block(std::string& out, std::string_view name, std::string_view text) {
  auto lines = text.empty() ? std::vector<std::string>{} : split(text.substr(0, text.size() - 1), '\n');
  out += std::string(name) + " " + std::to_string(lines.size()) + "\n";
  for (const auto& l : lines) out += l + "\n";
}

class SnapshotReader {
 public:
  explicit SnapshotReader(std::string_view text) {
    if (!text.empty() && text.back() != '\n')
      fail_at(0, "snapshot does not end with a newline (truncated?)");
    lines_ = split(text.substr(0, text.empty() ? 0 : text.size() - 1), '\n');
  }

  [[noreturn]] void fail_at(std::size_t line, const std::string& msg) const {
    throw Error(ErrorKind::Format, "snapshot line " + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }

  const std::string& next(std::string_view expecting) {
    if (pos_ >= lines_.size())
      fail_at(pos_ + 1, "unexpected end of snapshot, expected " + std::string(expecting));
    return lines_[pos_++];
  }

  // "<name> <value>"
  std::string field(std::string_view name) {
    const std::string& l = next(name);
    if (l.rfind(std::string(name) + " ", 0) != 0) fail("expected '" + std::string(name) + "'");
    return l.substr(name.size() + 1);
  }

  std::uint64_t number(std::string_view name) {
    std::string v = field(name);
    try {
      long n = parse_long(v);
      if (n < 0) fail("negative " + std::string(name));
      return static_cast<std::uint64_t>(n);
    } catch (const Error&) {
      fail("bad " + std::string(name) + " '" + v + "'");
    }
  }

  std::vector<std::string> block(std::string_view name) {
    std::uint64_t n = number(name);
    std::vector<std::string> out;
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(next(std::string(name) + " line"));
    return out;
  }

  std::optional<std::string> optional_block(std::string_view name) {
    const std::string& l = next(name);
    if (l == std::string(name) + " none") return std::nullopt;
    --pos_;
    auto lines = block(name);
    std::string text;
    for (const auto& x : lines) text += x + "\n";
    return text;
  }

  template <class F>
  void json_records(std::string_view name, F&& fn) {
    std::uint64_t n = number(name);
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::string& l = next(std::string(name) + " record");
      try {
        fn(json::parse(l));
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }
  }

  bool at_end() const { return pos_ == lines_.size(); }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

std::string format_snapshot(const StoreState& s) {
  std::string out(kSnapshotMagic);
  out += "\n";
  out += "revision " + std::to_string(s.revision) + "\n";
  out += "next_user " + std::to_string(s.next_user) + "\n";
  out += "next_course " + std::to_string(s.next_course) + "\n";
  put_block(out, "vocab", s.catalog_text.vocab);
  put_block(out, "goals", s.catalog_text.goals);
  put_block(out, "interests", s.catalog_text.interests);
  out += "users " + std::to_string(s.users.size()) + "\n" + users_text(s);
  out += "courses " + std::to_string(s.courses.size()) + "\n" + courses_text(s);
  out += "survey " + std::to_string(s.survey.size()) + "\n" + survey_text(s);
  if (s.nb_checkpoint) put_block(out, "nb_checkpoint", *s.nb_checkpoint);
  else out += "nb_checkpoint none\n";
  if (s.ranker_checkpoint) put_block(out, "ranker_checkpoint", *s.ranker_checkpoint);
  else out += "ranker_checkpoint none\n";
  out += "end\n";
  return out;
}

StoreState parse_snapshot(std::string_view text) {
  SnapshotReader r(text);
  if (r.next("header") != kSnapshotMagic) r.fail("not a courserec snapshot");
  StoreState s;
  s.revision = r.number("revision");
  s.next_user = r.number("next_user");
  s.next_course = r.number("next_course");
  s.catalog_text.vocab = join_lines(r.block("vocab"));
  s.catalog_text.goals = join_lines(r.block("goals"));
  s.catalog_text.interests = join_lines(r.block("interests"));
  try {
    s.catalog = parse_catalog(s.catalog_text);
  } catch (const Error& e) {
    r.fail(std::string("catalog: ") + e.what());
  }
  r.json_records("users", [&](const json& j) {
    auto u = user_from_json(j);
    if (!s.users.emplace(u.profile.user_id, u).second) r.fail("duplicate user " + u.profile.user_id);
  });
  r.json_records("courses", [&](const json& j) {
    auto c = course_from_json(j);
    if (!s.courses.emplace(c.course_id, c).second) r.fail("duplicate course " + c.course_id);
    if (s.find_course(c.provider, c.title)) r.fail("duplicate (provider, title) for " + c.course_id);
    index_course_key(s, c);
  });
  r.json_records("survey", [&](const json& j) { s.survey.push_back(survey_entry_from_json(j)); });
  s.nb_checkpoint = r.optional_block("nb_checkpoint");
  s.ranker_checkpoint = r.optional_block("ranker_checkpoint");
  if (r.next("end") != "end") r.fail("expected 'end'");
  if (!r.at_end()) r.fail("trailing content after 'end'");
  try {
    if (s.nb_checkpoint) load_nb_model(*s.nb_checkpoint);
    if (s.ranker_checkpoint) load_mlp_model(*s.ranker_checkpoint);
  } catch (const Error& e) {
    throw Error(ErrorKind::Format, std::string("snapshot checkpoint: ") + e.what());
  }
  auto problems = validate_store(s);
  if (!problems.empty()) throw Error(ErrorKind::Format, "snapshot: " + problems.front());
  return s;
}

std::string Store::snapshot() const { return format_snapshot(*view()); }

void Store::write_snapshot(const fs::path& path) const { write_file_atomic(path, snapshot()); }

void Store::restore(std::string_view snapshot_text) {
  auto s = std::make_shared<StoreState>(parse_snapshot(snapshot_text));
  std::lock_guard lock(writer_);
  persist(*s, nullptr);
  publish(std::move(s));
}

void Store::restore_file(const fs::path& path) { restore(read_file(path)); }

}  // namespace courserec
