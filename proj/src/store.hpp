#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "domain.hpp"

namespace courserec {

struct UserRecord {
  UserProfile profile;
  std::string token;

  bool operator==(const UserRecord&) const = default;
};

enum class Split { Train, Test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct SurveyEntry {
  SurveyRecord record;
  Split split = Split::Train;

  bool operator==(const SurveyEntry&) const = default;
};

// Source text of the catalog files, kept so snapshots reproduce them exactly.
struct CatalogTexts {
  std::string vocab;
  std::string goals;
  std::string interests;

  static CatalogTexts load(const std::filesystem::path& dir);
  bool operator==(const CatalogTexts&) const = default;
};

using CourseKey = std::pair<std::string, std::string>;  // (provider, title)

// An immutable view of the store at one revision.
struct StoreState {
  std::uint64_t revision = 0;
  std::uint64_t next_user = 1;
  std::uint64_t next_course = 1;
  CatalogTexts catalog_text;
  std::shared_ptr<const Catalog> catalog;
  std::map<std::string, UserRecord> users;
  std::map<std::string, Course> courses;
  std::map<CourseKey, std::string> course_keys;
  std::vector<SurveyEntry> survey;
  std::optional<std::string> nb_checkpoint;
  std::optional<std::string> ranker_checkpoint;

  const UserRecord* find_user(const std::string& id) const;
  const Course* find_course(const std::string& id) const;
  const Course* find_course(const std::string& provider, const std::string& title) const;
};

// Full scan of referential integrity. Empty when the state is consistent.
std::vector<std::string> validate_store(const StoreState& s);

// Mutations staged against a private copy of the state; see Store::commit.
class Batch {
 public:
  explicit Batch(StoreState& s) : s_(s) {}

  const StoreState& state() const { return s_; }

  // Empty user_id allocates a fresh id. An existing user keeps its token
  // unless one is given.
  std::string upsert_user(UserProfile p, std::optional<std::string> token = std::nullopt);

  // Empty course_id inserts a new course; an existing (provider, title) is a
  // conflict. A known course_id replaces that course, which must not take
  // another course's key.
  std::string upsert_course(Course c);
  void delete_course(const std::string& course_id);
  void set_survey(std::vector<SurveyEntry> survey);
  void set_nb_checkpoint(std::string text);
  void set_ranker_checkpoint(std::string text);

  bool changed() const { return users_ || courses_ || survey_ || nb_ || ranker_; }

 private:
  friend class Store;
  StoreState& s_;
  bool users_ = false, courses_ = false, survey_ = false, nb_ = false, ranker_ = false;
};

// Single-writer store. Readers take a view and never block the writer; every
// committed batch with changes publishes a new view with revision + 1. When
// backed by a directory, changed files are rewritten atomically before the
// new view is published.
class Store {
 public:
  // In-memory store over the given catalog.
  explicit Store(CatalogTexts catalog);

  // Loads a data directory: vocab.tsv, tables/*.tsv and whichever of
  // users.jsonl, courses.jsonl, survey.jsonl, models/*.ckpt, meta.json exist.
  static std::unique_ptr<Store> open(const std::filesystem::path& dir);
  // Writes the catalog files into an empty or missing directory and opens it.
  static std::unique_ptr<Store> create(const std::filesystem::path& dir, const CatalogTexts& catalog);

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  std::shared_ptr<const StoreState> view() const;
  std::uint64_t revision() const { return view()->revision; }
  const std::optional<std::filesystem::path>& dir() const { return dir_; }

  // Runs `fn` on a copy of the current state. Nothing is published if `fn`
  // throws, validation fails or a file cannot be written. Returns the
  // revision of the resulting view (unchanged when the batch was empty).
  std::uint64_t commit(const std::function<void(Batch&)>& fn);

  std::string upsert_user(UserProfile p, std::optional<std::string> token = std::nullopt);
  std::string upsert_course(Course c);
  void delete_course(const std::string& course_id);

  std::string snapshot() const;
  void write_snapshot(const std::filesystem::path& path) const;
  // Replaces the whole state with a snapshot. On any error the store is left
  // as it was.
  void restore(std::string_view snapshot_text);
  void restore_file(const std::filesystem::path& path);

 private:
  Store() = default;
  void persist(const StoreState& s, const Batch* dirty);
  void publish(std::shared_ptr<const StoreState> s);

  std::optional<std::filesystem::path> dir_;
  std::mutex writer_;
  mutable std::mutex view_mutex_;
  std::shared_ptr<const StoreState> current_;
};

StoreState parse_snapshot(std::string_view text);
std::string format_snapshot(const StoreState& s);

}  // namespace courserec
