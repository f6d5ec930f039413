#include <courserec/courserec.h>

#include <cstdlib>
#include <cstring>
#include <string>

#include "engine.hpp"
#include "error.hpp"
#include "io.hpp"
#include "service.hpp"
#include "survey.hpp"
#include "text.hpp"

using namespace courserec;
using nlohmann::json;
namespace fs = std::filesystem;

struct crec_engine {
  std::unique_ptr<Engine> engine;
  std::unique_ptr<Service> service;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_field;

crec_status status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return CREC_ERR_VALIDATION;
    case ErrorKind::NotFound: return CREC_ERR_NOT_FOUND;
    case ErrorKind::Conflict: return CREC_ERR_CONFLICT;
    case ErrorKind::Unavailable: return CREC_ERR_UNAVAILABLE;
    case ErrorKind::Io: return CREC_ERR_IO;
    case ErrorKind::Format: return CREC_ERR_FORMAT;
    case ErrorKind::Encoding: return CREC_ERR_ENCODING;
    case ErrorKind::Training: return CREC_ERR_TRAINING;
    case ErrorKind::Rule: return CREC_ERR_RULE;
    case ErrorKind::Internal: return CREC_ERR_INTERNAL;
  }
  return CREC_ERR_INTERNAL;
}

crec_status fail(crec_status s, std::string message, std::string field = {}) {
  g_error = std::move(message);
  g_field = std::move(field);
  return s;
}

template <class F>
crec_status guarded(F&& fn) {
  try {
    fn();
    return CREC_OK;
  } catch (const Error& e) {
    return fail(status_for(e.kind()), e.what(), e.field());
  } catch (const fs::filesystem_error& e) {
    return fail(CREC_ERR_IO, e.what());
  } catch (const json::exception& e) {
    return fail(CREC_ERR_VALIDATION, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CREC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CREC_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

std::string str(const char* s) { return s ? s : ""; }

void require(const char* value, const char* name) {
  if (!value || !*value) throw Error(ErrorKind::Validation, std::string(name) + " is required", name);
}

json parse_json_arg(const char* text, const char* name) {
  if (!text || !*text) return nullptr;
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    throw Error(ErrorKind::Validation, std::string(name) + " is not valid JSON", name);
  }
}

json eval_json(const EvalReport& r) {
  return {{"rms_error", r.rms_error}, {"accuracy", r.tolerance1_accuracy}, {"n_test", r.n_test}};
}

SurveyOracle::Dataset generate(const Catalog& catalog, std::uint64_t seed, size_t n_train, size_t n_test) {
  if (n_train == 0) throw Error(ErrorKind::Validation, "training set size must be positive", "train");
  return SurveyOracle(catalog).generate(seed, n_train, n_test);
}

NbModel train_nb_from(const fs::path& docs, const fs::path& labels, const Vocabulary& vocab) {
  return nb_train_from_documents(load_documents(docs), load_keyphrase_labels(labels), vocab);
}

}  // namespace

extern "C" {

const char* crec_version(void) { return "1.0.0"; }

const char* crec_status_name(crec_status s) {
  switch (s) {
    case CREC_OK: return "ok";
    case CREC_ERR_VALIDATION: return "validation";
    case CREC_ERR_NOT_FOUND: return "not_found";
    case CREC_ERR_CONFLICT: return "conflict";
    case CREC_ERR_UNAVAILABLE: return "unavailable";
    case CREC_ERR_IO: return "io";
    case CREC_ERR_FORMAT: return "format";
    case CREC_ERR_ENCODING: return "encoding";
    case CREC_ERR_TRAINING: return "training";
    case CREC_ERR_RULE: return "rule";
    case CREC_ERR_INTERNAL: return "internal";
    case CREC_ERR_ARGUMENT: return "argument";
  }
  return "unknown";
}

const char* crec_last_error(void) { return g_error.c_str(); }
const char* crec_last_error_field(void) { return g_field.c_str(); }

void crec_free(char* s) { std::free(s); }

crec_status crec_init_data_dir(const char* data_dir, const char* fixtures_dir, uint64_t survey_seed,
                               size_t n_train, size_t n_test, char** summary_json) {
  return guarded([&] {
    require(data_dir, "data_dir");
    require(fixtures_dir, "fixtures_dir");
    fs::path fixtures = fixtures_dir;
    auto store = Store::create(data_dir, CatalogTexts::load(fixtures));
    const Catalog& catalog = *store->view()->catalog;
    auto nb = train_nb_from(fixtures / "nb" / "docs", fixtures / "nb" / "labels.tsv", catalog.vocabulary);
    auto data = generate(catalog, survey_seed, n_train, n_test);
    std::vector<SurveyEntry> survey;
    for (auto& r : data.train) survey.push_back({r, Split::Train});
    for (auto& r : data.test) survey.push_back({r, Split::Test});
    auto rev = store->commit([&](Batch& b) {
      b.set_nb_checkpoint(save_nb_model(nb));
      b.set_survey(std::move(survey));
    });
    put(summary_json, json{{"data_dir", data_dir},
                           {"vocabulary", catalog.vocabulary.size()},
                           {"survey_train", data.train.size()},
                           {"survey_test", data.test.size()},
                           {"survey_seed", survey_seed},
                           {"store_revision", rev}}
                          .dump());
  });
}

crec_status crec_engine_open(const char* data_dir, crec_engine** out) {
  if (!out) return fail(CREC_ERR_ARGUMENT, "out is null");
  *out = nullptr;
  return guarded([&] {
    require(data_dir, "data_dir");
    auto handle = std::make_unique<crec_engine>();
    handle->engine = std::make_unique<Engine>(Store::open(data_dir));
    handle->service = std::make_unique<Service>(*handle->engine, "");
    *out = handle.release();
  });
}

void crec_engine_close(crec_engine* engine) { delete engine; }

crec_status crec_engine_set_admin_secret(crec_engine* engine, const char* secret) {
  if (!engine) return fail(CREC_ERR_ARGUMENT, "engine is null");
  return guarded([&] { engine->service = std::make_unique<Service>(*engine->engine, str(secret)); });
}

crec_status crec_engine_handle_request(crec_engine* engine, const char* method, const char* path,
                                       const char* query, const char* authorization,
                                       const char* admin_secret, const char* body, int* http_status,
                                       char** response_body) {
  if (!engine || !http_status || !response_body)
    return fail(CREC_ERR_ARGUMENT, "engine, http_status and response_body are required");
  return guarded([&] {
    require(method, "method");
    require(path, "path");
    HttpRequest req{str(method), str(path), str(query), str(authorization), str(admin_secret), str(body)};
    HttpResponse res = engine->service->handle(req);
    *response_body = dup(res.body);
    *http_status = res.status;
  });
}

crec_status crec_engine_recommend(crec_engine* engine, const char* user_id, int limit,
                                  const char* model_path, char** response_json) {
  if (!engine) return fail(CREC_ERR_ARGUMENT, "engine is null");
  return guarded([&] {
    require(user_id, "user_id");
    std::optional<long> lim;
    if (limit > 0) lim = limit;
    RecommendationResponse r;
    if (model_path && *model_path) {
      std::string text = read_file(model_path);
      r = engine->engine->recommend_with(load_mlp_model(text), checkpoint_revision(text), user_id, lim);
    } else {
      r = engine->engine->recommend(user_id, lim);
    }
    json j = to_json(r);
    j["limit"] = clamp_recommendation_limit(lim);
    put(response_json, j.dump());
  });
}

crec_status crec_engine_ingest(crec_engine* engine, const char* corpus_dir, char** report_json) {
  if (!engine) return fail(CREC_ERR_ARGUMENT, "engine is null");
  return guarded([&] {
    require(corpus_dir, "corpus_dir");
    put(report_json, to_json(engine->engine->ingest(corpus_dir)).dump());
  });
}

crec_status crec_engine_train(crec_engine* engine, const char* config_json, char** job_json) {
  if (!engine) return fail(CREC_ERR_ARGUMENT, "engine is null");
  return guarded([&] {
    auto cfg = train_config_from_json(parse_json_arg(config_json, "config"));
    put(job_json, to_json(engine->engine->train(cfg)).dump());
  });
}

crec_status crec_gen_data(const char* catalog_dir, uint64_t seed, size_t n_train, size_t n_test,
                          const char* out_dir, char** summary_json) {
  return guarded([&] {
    require(catalog_dir, "catalog_dir");
    require(out_dir, "out_dir");
    Catalog catalog = Catalog::load(catalog_dir);
    auto data = generate(catalog, seed, n_train, n_test);
    fs::path out = out_dir;
    fs::create_directories(out);
    save_survey_file(out / "train.tsv", data.train);
    save_survey_file(out / "test.tsv", data.test);
    put(summary_json, json{{"seed", seed},
                           {"train", data.train.size()},
                           {"test", data.test.size()},
                           {"train_path", (out / "train.tsv").string()},
                           {"test_path", (out / "test.tsv").string()}}
                          .dump());
  });
}

crec_status crec_train(const char* catalog_dir, const char* survey_dir, const char* config_json,
                       const char* model_out, char** report_json) {
  return guarded([&] {
    require(catalog_dir, "catalog_dir");
    require(survey_dir, "survey_dir");
    require(model_out, "model_out");
    Catalog catalog = Catalog::load(catalog_dir);
    auto cfg = train_config_from_json(parse_json_arg(config_json, "config"));
    fs::path dir = survey_dir;
    auto train_set = load_survey_file(dir / "train.tsv");
    auto model = train(train_set, cfg, catalog);
    std::string text = save_mlp_model(model);
    write_file_atomic(model_out, text);
    json j = {{"config", to_json(cfg)},
              {"n_train", train_set.size()},
              {"model", model_out},
              {"model_revision", checkpoint_revision(text)}};
    if (fs::exists(dir / "test.tsv")) {
      auto test_set = load_survey_file(dir / "test.tsv");
      if (!test_set.empty()) j["report"] = eval_json(evaluate(model, test_set, catalog));
    }
    put(report_json, j.dump());
  });
}

crec_status crec_sweep(const char* catalog_dir, const char* survey_dir, const char* configs,
                       const char* base_config_json, char** results_json) {
  return guarded([&] {
    require(catalog_dir, "catalog_dir");
    require(survey_dir, "survey_dir");
    require(configs, "configs");
    Catalog catalog = Catalog::load(catalog_dir);
    TrainConfig base = train_config_from_json(parse_json_arg(base_config_json, "config"));
    std::vector<TrainConfig> list;
    for (const auto& spec : split(configs, ',')) {
      TrainConfig c = base;
      try {
        c.hidden = parse_hidden(trim(spec));
      } catch (const Error& e) {
        throw Error(ErrorKind::Validation, std::string("configs: ") + e.what(), "configs");
      }
      list.push_back(c);
    }
    fs::path dir = survey_dir;
    auto results = config_sweep(load_survey_file(dir / "train.tsv"), load_survey_file(dir / "test.tsv"),
                                list, catalog);
    json out = json::array();
    for (const auto& r : results) {
      json j = eval_json(r.report);
      j["config"] = to_json(r.config);
      out.push_back(j);
    }
    put(results_json, out.dump());
  });
}

crec_status crec_train_nb(const char* catalog_dir, const char* docs_dir, const char* labels_path,
                          const char* model_out, char** summary_json) {
  return guarded([&] {
    require(catalog_dir, "catalog_dir");
    require(docs_dir, "docs_dir");
    require(labels_path, "labels_path");
    require(model_out, "model_out");
    Catalog catalog = Catalog::load(catalog_dir);
    auto model = train_nb_from(docs_dir, labels_path, catalog.vocabulary);
    write_file_atomic(model_out, save_nb_model(model));
    put(summary_json, json{{"model", model_out},
                           {"positives", model.y_count},
                           {"negatives", model.n_count},
                           {"documents", model.corpus.n_docs}}
                          .dump());
  });
}

crec_status crec_extract_keywords(const char* doc_path, const char* vocab_path,
                                  const char* nb_model_path, char** keywords_json) {
  return guarded([&] {
    require(doc_path, "doc");
    require(vocab_path, "vocab");
    require(nb_model_path, "nb_model");
    Vocabulary vocab = Vocabulary::load(vocab_path);
    NbModel model = load_nb_model_file(nb_model_path);
    std::string doc = read_file(doc_path);
    auto stats = model.corpus.with_document(doc, vocab);
    auto ids = extract_keywords(doc, vocab, stats, model);
    json kws = json::array();
    for (TermId id : ids) kws.push_back({{"id", id}, {"term", vocab.at(id).term}});
    put(keywords_json, json{{"keywords", kws}, {"discipline", to_string(classify_course(ids, vocab))}}.dump());
  });
}

crec_status crec_learn_rules(const char* provider_dir, char** rules_json) {
  return guarded([&] {
    require(provider_dir, "corpus");
    auto corpus = load_provider_corpus(provider_dir);
    auto rules = learn_rules(corpus.examples);
    json out = json::array();
    for (const auto& r : rules) out.push_back({{"field", r.field}, {"prefix", r.prefix}, {"suffix", r.suffix}});
    std::size_t records = 0;
    for (const auto& [file, page] : corpus.pages) records += apply_rules(rules, page, "").size();
    put(rules_json, json{{"provider", corpus.name},
                         {"training_pages", corpus.examples.size()},
                         {"pages", corpus.pages.size()},
                         {"records", records},
                         {"rules", out}}
                        .dump());
  });
}

}  // extern "C"
