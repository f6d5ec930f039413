#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "keyphrase.hpp"
#include "ranker.hpp"
#include "search.hpp"
#include "store.hpp"
#include "wrapper.hpp"

namespace courserec {

inline constexpr long kDefaultRecommendations = 10;
inline constexpr long kMinRecommendations = 5;
inline constexpr long kMaxRecommendations = 15;

// Missing -> 10, otherwise clamped into 5..15.
long clamp_recommendation_limit(std::optional<long> requested);

// Short content hash (FNV-1a, 16 hex digits) identifying a checkpoint.
std::string checkpoint_revision(std::string_view checkpoint_text);

struct RecommendationItem {
  std::string course_id;
  std::string provider;
  std::string title;
  int predicted_rank = 3;
  double score = 0.0;
};

struct RecommendationResponse {
  std::string user_id;
  std::vector<RecommendationItem> items;
  std::string model_revision;
  std::uint64_t store_revision = 0;
};

nlohmann::json to_json(const RecommendationResponse& r);

struct IngestReport {
  std::size_t added = 0;
  std::size_t updated = 0;
  std::size_t skipped = 0;
  std::vector<std::string> course_ids;  // added or updated, in record order
  std::vector<std::string> warnings;
  std::uint64_t store_revision = 0;
};

nlohmann::json to_json(const IngestReport& r);

struct CourseHit {
  Course course;
  double score = 0.0;
};

enum class JobState { Running, Succeeded, Failed };
std::string_view to_string(JobState s);

struct TrainJob {
  std::uint64_t id = 0;
  JobState state = JobState::Running;
  TrainConfig config;
  std::optional<EvalReport> report;  // on the test split, when there is one
  std::size_t n_train = 0;
  std::string model_revision;
  std::uint64_t store_revision = 0;
  std::string error;
};

nlohmann::json to_json(const TrainJob& j);
nlohmann::json to_json(const TrainConfig& c);
// Missing keys keep their defaults; hidden may be "32-16" or [32, 16].
TrainConfig train_config_from_json(const nlohmann::json& j);

// The recommendation engine over one store: keyphrase extraction, search,
// ranking, ingestion and model training. Derived structures (search index,
// parsed models) are rebuilt lazily when the store view they came from is
// replaced.
class Engine {
 public:
  explicit Engine(std::unique_ptr<Store> store);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  Store& store() { return *store_; }
  const Store& store() const { return *store_; }

  // Throws NotFound for an unknown user and Unavailable without a model.
  RecommendationResponse recommend(const std::string& user_id, std::optional<long> limit) const;
  // Same pipeline with an explicitly supplied model.
  RecommendationResponse recommend_with(const MlpModel& model, const std::string& model_revision,
                                        const std::string& user_id, std::optional<long> limit) const;

  std::vector<CourseHit> search(std::string_view text, std::optional<Discipline> filter,
                                std::size_t limit) const;

  // Keywords for a document outside the store, with document frequencies
  // taken from the store's courses plus the document itself.
  std::vector<TermId> extract_keywords(std::string_view document) const;

  // Inserts or replaces a course. Without keywords they are extracted and
  // the discipline is derived from them.
  std::string put_course(Course c);

  // Upserts extracted records keyed on (provider, title) in one batch.
  IngestReport integrate(std::span<const ExtractedRecord> records);
  // Learns rules per provider directory, applies them to every page and
  // integrates the result.
  IngestReport ingest(const std::filesystem::path& corpus_dir);

  // Trains on the stored survey (train split), evaluates on the test split
  // and publishes the checkpoint. Blocks the caller.
  TrainJob train(const TrainConfig& cfg);
  // Runs train() on a background thread; one job at a time.
  std::uint64_t start_train_job(const TrainConfig& cfg);
  std::optional<TrainJob> job(std::uint64_t id) const;
  void wait_for_jobs();

  // Empty when no ranking model is stored.
  std::string model_revision() const;

 private:
  struct Derived;
  std::shared_ptr<const Derived> derived() const;
  TrainJob run_training(std::uint64_t id, const TrainConfig& cfg);

  std::unique_ptr<Store> store_;

  mutable std::mutex cache_mutex_;
  mutable std::shared_ptr<const Derived> cache_;

  mutable std::mutex jobs_mutex_;
  std::map<std::uint64_t, TrainJob> jobs_;
  std::uint64_t next_job_ = 1;
  bool job_running_ = false;
  std::thread worker_;
};

}  // namespace courserec
