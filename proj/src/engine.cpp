#include "engine.hpp"

#include <algorithm>
#include <cstdio>

#include "error.hpp"

namespace courserec {

namespace fs = std::filesystem;
using nlohmann::json;

long clamp_recommendation_limit(std::optional<long> requested) {
  if (!requested) return kDefaultRecommendations;
  return std::clamp(*requested, kMinRecommendations, kMaxRecommendations);
}

std::string checkpoint_revision(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const RecommendationResponse& r) {
  json items = json::array();
  for (const auto& i : r.items)
    items.push_back({{"course_id", i.course_id},
                     {"provider", i.provider},
                     {"title", i.title},
                     {"predicted_rank", i.predicted_rank},
                     {"score", i.score}});
  return {{"user_id", r.user_id},
          {"items", items},
          {"model_revision", r.model_revision},
          {"store_revision", r.store_revision}};
}

json to_json(const IngestReport& r) {
  return {{"added", r.added},
          {"updated", r.updated},
          {"skipped", r.skipped},
          {"course_ids", r.course_ids},
          {"warnings", r.warnings},
          {"store_revision", r.store_revision}};
}

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::Running: return "running";
    case JobState::Succeeded: return "succeeded";
    case JobState::Failed: return "failed";
  }
  return "failed";
}

json to_json(const TrainConfig& c) {
  return {{"hidden", format_hidden(c.hidden)},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"init_range", c.init_range}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error(ErrorKind::Validation, "config must be an object", "config");
  try {
    if (j.contains("hidden")) {
      const auto& h = j["hidden"];
      if (h.is_string()) c.hidden = parse_hidden(h.get<std::string>());
      else c.hidden = h.get<std::vector<std::size_t>>();
    }
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("init_range")) c.init_range = j["init_range"].get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation, std::string("bad training config: ") + e.what(), "config");
  }
  if (c.hidden.empty() || std::count(c.hidden.begin(), c.hidden.end(), 0u))
    throw Error(ErrorKind::Validation, "hidden layer sizes must be positive", "hidden");
  if (c.epochs <= 0) throw Error(ErrorKind::Validation, "epochs must be positive", "epochs");
  if (!(c.learning_rate > 0)) throw Error(ErrorKind::Validation, "learning_rate must be positive", "learning_rate");
  if (!(c.init_range > 0)) throw Error(ErrorKind::Validation, "init_range must be positive", "init_range");
  return c;
}

json to_json(const TrainJob& j) {
  json out = {{"job_id", j.id},
              {"state", to_string(j.state)},
              {"config", to_json(j.config)},
              {"n_train", j.n_train}};
  if (j.report)
    out["report"] = {{"rms_error", j.report->rms_error},
                     {"accuracy", j.report->tolerance1_accuracy},
                     {"n_test", j.report->n_test}};
  if (!j.model_revision.empty()) out["model_revision"] = j.model_revision;
  if (j.store_revision) out["store_revision"] = j.store_revision;
  if (!j.error.empty()) out["error"] = j.error;
  return out;
}

// --- Engine -----------------------------------------------------------------------

struct Engine::Derived {
  std::shared_ptr<const StoreState> state;
  std::shared_ptr<const InvertedIndex> index;
  std::shared_ptr<const MlpModel> mlp;
  std::string model_revision;
  std::shared_ptr<const NbModel> nb;
};

Engine::Engine(std::unique_ptr<Store> store) : store_(std::move(store)) {
  if (!store_) throw Error(ErrorKind::Internal, "engine needs a store");
}

Engine::~Engine() { wait_for_jobs(); }

std::shared_ptr<const Engine::Derived> Engine::derived() const {
  std::lock_guard lock(cache_mutex_);
  auto view = store_->view();
  if (cache_ && cache_->state == view) return cache_;
  auto d = std::make_shared<Derived>();
  d->state = view;
  const Derived* old = cache_.get();
  if (old && old->state->courses == view->courses) {
    d->index = old->index;
  } else {
    auto index = std::make_shared<InvertedIndex>();
    for (const auto& [id, c] : view->courses) index->index_course(c);
    d->index = std::move(index);
  }
  if (view->ranker_checkpoint) {
    if (old && old->state->ranker_checkpoint == view->ranker_checkpoint) {
      d->mlp = old->mlp;
      d->model_revision = old->model_revision;
    } else {
      d->mlp = std::make_shared<MlpModel>(load_mlp_model(*view->ranker_checkpoint));
      d->model_revision = checkpoint_revision(*view->ranker_checkpoint);
    }
  }
  if (view->nb_checkpoint) {
    if (old && old->state->nb_checkpoint == view->nb_checkpoint) d->nb = old->nb;
    else d->nb = std::make_shared<NbModel>(load_nb_model(*view->nb_checkpoint));
  }
  cache_ = d;
  return d;
}

std::string Engine::model_revision() const { return derived()->model_revision; }

RecommendationResponse Engine::recommend(const std::string& user_id, std::optional<long> limit) const {
  auto d = derived();
  if (!d->state->find_user(user_id)) throw Error(ErrorKind::NotFound, "no user " + user_id, "user_id");
  if (!d->mlp)
    throw Error(ErrorKind::Unavailable,
                "no trained ranking model; run `courserec train` or POST /api/admin/train");
  return recommend_with(*d->mlp, d->model_revision, user_id, limit);
}

RecommendationResponse Engine::recommend_with(const MlpModel& model, const std::string& model_revision,
                                              const std::string& user_id,
                                              std::optional<long> limit) const {
  auto d = derived();
  const StoreState& s = *d->state;
  const UserRecord* user = s.find_user(user_id);
  if (!user) throw Error(ErrorKind::NotFound, "no user " + user_id, "user_id");
  if (model.input_size() != kInputSize)
    throw Error(ErrorKind::Format, "ranking model expects " + std::to_string(model.input_size()) +
                                       " inputs, not " + std::to_string(kInputSize));

  auto query = build_query(user->profile, s.catalog->vocabulary);
  auto hits = d->index->search(query, kCandidateLimit);
  RecommendationResponse r;
  r.user_id = user_id;
  r.model_revision = model_revision;
  r.store_revision = s.revision;
  for (const auto& hit : hits) {
    const Course& c = *s.find_course(hit.course_id);
    auto ranked = predict_rank(model, user->profile, c, *s.catalog);
    r.items.push_back({c.course_id, c.provider, c.title, ranked.predicted_rank, ranked.score});
  }
  std::sort(r.items.begin(), r.items.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.course_id < b.course_id;
  });
  auto n = static_cast<std::size_t>(clamp_recommendation_limit(limit));
  if (r.items.size() > n) r.items.resize(n);
  return r;
}

std::vector<CourseHit> Engine::search(std::string_view text, std::optional<Discipline> filter,
                                      std::size_t limit) const {
  auto d = derived();
  std::vector<CourseHit> out;
  for (const auto& hit : d->index->search(text_query(text, filter), limit))
    out.push_back({*d->state->find_course(hit.course_id), hit.score});
  return out;
}

namespace {

std::vector<std::string> store_documents(const StoreState& s) {
  std::vector<std::string> docs;
  docs.reserve(s.courses.size());
  for (const auto& [id, c] : s.courses) docs.push_back(course_document(c));
  return docs;
}

const NbModel& require_nb(const std::shared_ptr<const NbModel>& nb) {
  if (!nb)
    throw Error(ErrorKind::Unavailable,
                "no keyphrase model; run `courserec train-nb` or `courserec init` first");
  return *nb;
}

}  // namespace

std::vector<TermId> Engine::extract_keywords(std::string_view document) const {
  auto d = derived();
  const NbModel& nb = require_nb(d->nb);
  const Vocabulary& vocab = d->state->catalog->vocabulary;
  auto stats = CorpusStats::build(store_documents(*d->state), vocab).with_document(document, vocab);
  return courserec::extract_keywords(document, vocab, stats, nb);
}

std::string Engine::put_course(Course c) {
  if (c.keywords.empty()) {
    auto d = derived();
    if (d->nb) {
      c.keywords = extract_keywords(course_document(c));
      c.discipline = classify_course(c.keywords, d->state->catalog->vocabulary);
    }
  }
  return store_->upsert_course(std::move(c));
}

IngestReport Engine::integrate(std::span<const ExtractedRecord> records) {
  auto nb = derived()->nb;
  const NbModel& model = require_nb(nb);
  IngestReport report;
  report.store_revision = store_->commit([&](Batch& b) {
    const StoreState& s = b.state();
    const Vocabulary& vocab = s.catalog->vocabulary;
    // Final text per (provider, title) after this batch.
    std::map<CourseKey, Course> changed;
    std::vector<CourseKey> order;
    for (const auto& r : records) {
      if (r.title.empty() || r.provider.empty()) {
        report.warnings.push_back("record without title or provider skipped");
        ++report.skipped;
        continue;
      }
      CourseKey key{r.provider, r.title};
      auto staged = changed.find(key);
      bool in_batch = staged != changed.end();
      const Course* current = in_batch ? &staged->second : s.find_course(r.provider, r.title);
      if (current && current->description == r.description) {
        ++report.skipped;
        continue;
      }
      if (!in_batch) {
        order.push_back(key);
        ++(current ? report.updated : report.added);
      }
      Course c = current ? *current : Course{};
      c.provider = r.provider;
      c.title = r.title;
      c.description = r.description;
      if (!r.source_url.empty()) c.source_url = r.source_url;
      changed[key] = std::move(c);
    }
    if (changed.empty()) return;

    std::vector<std::string> docs;
    for (const auto& [id, c] : s.courses)
      if (!changed.count({c.provider, c.title})) docs.push_back(course_document(c));
    for (const auto& [key, c] : changed) docs.push_back(course_document(c));
    auto stats = CorpusStats::build(docs, vocab);

    for (const auto& key : order) {
      Course& c = changed.at(key);
      c.keywords = courserec::extract_keywords(course_document(c), vocab, stats, model);
      c.discipline = classify_course(c.keywords, vocab);
      report.course_ids.push_back(b.upsert_course(c));
    }
  });
  return report;
}

IngestReport Engine::ingest(const fs::path& corpus_dir) {
  std::vector<ExtractedRecord> records;
  std::vector<std::string> warnings;
  for (const auto& dir : provider_dirs(corpus_dir)) {
    auto corpus = load_provider_corpus(dir);
    if (corpus.examples.empty())
      throw Error(ErrorKind::Rule, corpus.name + ": no labelled examples (examples.tsv)");
    auto rules = learn_rules(corpus.examples);
    for (const auto& [file, page] : corpus.pages) {
      auto url = corpus.urls.find(file);
      std::string source = url == corpus.urls.end() ? "" : url->second;
      if (source.empty()) warnings.push_back(corpus.name + "/" + file + ": not in manifest.tsv");
      std::vector<std::string> page_warnings;
      for (auto& r : apply_rules(rules, page, source, &page_warnings)) {
        if (r.provider.empty()) r.provider = corpus.name;
        records.push_back(std::move(r));
      }
      for (auto& w : page_warnings) warnings.push_back(corpus.name + "/" + file + ": " + w);
    }
  }
  auto report = integrate(records);
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
  return report;
}

TrainJob Engine::run_training(std::uint64_t id, const TrainConfig& cfg) {
  TrainJob job;
  job.id = id;
  job.config = cfg;
  try {
    auto view = store_->view();
    std::vector<SurveyRecord> train_set, test_set;
    for (const auto& e : view->survey) (e.split == Split::Train ? train_set : test_set).push_back(e.record);
    if (train_set.empty())
      throw Error(ErrorKind::Unavailable, "no survey training data; run `courserec init` or `gen-data`");
    job.n_train = train_set.size();
    auto model = courserec::train(train_set, cfg, *view->catalog);
    if (!test_set.empty()) job.report = evaluate(model, test_set, *view->catalog);
    auto text = save_mlp_model(model);
    job.store_revision = store_->commit([&](Batch& b) { b.set_ranker_checkpoint(text); });
    job.model_revision = checkpoint_revision(*store_->view()->ranker_checkpoint);
    job.state = JobState::Succeeded;
  } catch (const std::exception& e) {
    job.state = JobState::Failed;
    job.error = e.what();
  }
  return job;
}

TrainJob Engine::train(const TrainConfig& cfg) {
  std::uint64_t id;
  {
    std::lock_guard lock(jobs_mutex_);
    if (job_running_) throw Error(ErrorKind::Conflict, "a training job is already running");
    job_running_ = true;
    id = next_job_++;
    jobs_[id] = TrainJob{id, JobState::Running, cfg, {}, 0, {}, 0, {}};
  }
  TrainJob job = run_training(id, cfg);
  {
    std::lock_guard lock(jobs_mutex_);
    jobs_[id] = job;
    job_running_ = false;
  }
  if (job.state == JobState::Failed) {
    auto kind = job.error.find("no survey") != std::string::npos ? ErrorKind::Unavailable
                                                                 : ErrorKind::Training;
    throw Error(kind, job.error);
  }
  return job;
}

std::uint64_t Engine::start_train_job(const TrainConfig& cfg) {
  std::lock_guard lock(jobs_mutex_);
  if (job_running_) throw Error(ErrorKind::Conflict, "a training job is already running");
  if (worker_.joinable()) worker_.join();
  job_running_ = true;
  std::uint64_t id = next_job_++;
  jobs_[id] = TrainJob{id, JobState::Running, cfg, {}, 0, {}, 0, {}};
  worker_ = std::thread([this, id, cfg] {
    TrainJob job = run_training(id, cfg);
    std::lock_guard lock(jobs_mutex_);
    jobs_[id] = job;
    job_running_ = false;
  });
  return id;
}

std::optional<TrainJob> Engine::job(std::uint64_t id) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void Engine::wait_for_jobs() {
  std::thread t;
  {
    std::lock_guard lock(jobs_mutex_);
    t = std::move(worker_);
  }
  if (t.joinable()) t.join();
}

}  // namespace courserec
