/* courserec C API.
 *
 * Every call returns a crec_status. On failure, crec_last_error() describes
 * the problem for the calling thread. Strings returned through char** out
 * parameters are heap allocated and must be released with crec_free().
 * Structured results are JSON documents; see docs/api.md.
 */
#ifndef COURSEREC_H
#define COURSEREC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CREC_API __declspec(dllexport)
#else
#define CREC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum crec_status {
  CREC_OK = 0,
  CREC_ERR_VALIDATION = 1,
  CREC_ERR_NOT_FOUND = 2,
  CREC_ERR_CONFLICT = 3,
  CREC_ERR_UNAVAILABLE = 4,
  CREC_ERR_IO = 5,
  CREC_ERR_FORMAT = 6,
  CREC_ERR_ENCODING = 7,
  CREC_ERR_TRAINING = 8,
  CREC_ERR_RULE = 9,
  CREC_ERR_INTERNAL = 10,
  CREC_ERR_ARGUMENT = 11 /* null handle or missing required argument */
} crec_status;

typedef struct crec_engine crec_engine;

CREC_API const char* crec_version(void);
CREC_API const char* crec_status_name(crec_status status);

/* Message and offending field name (possibly "") of the last failure on this
 * thread. Valid until the next failing call on the same thread. */
CREC_API const char* crec_last_error(void);
CREC_API const char* crec_last_error_field(void);

CREC_API void crec_free(char* s);

/* --- data directories ---------------------------------------------------- */

/* Creates a data directory from a fixture directory (vocab.tsv, tables/,
 * nb/docs, nb/labels.tsv): catalog, keyphrase model and a synthetic survey of
 * n_train + n_test records drawn with survey_seed. Writes a JSON summary. */
CREC_API crec_status crec_init_data_dir(const char* data_dir, const char* fixtures_dir,
                                        uint64_t survey_seed, size_t n_train, size_t n_test,
                                        char** summary_json);

CREC_API crec_status crec_engine_open(const char* data_dir, crec_engine** out);
CREC_API void crec_engine_close(crec_engine* engine);

/* Secret for admin endpoints of crec_engine_handle_request; NULL or ""
 * disables them. */
CREC_API crec_status crec_engine_set_admin_secret(crec_engine* engine, const char* secret);

/* Serves one request of the JSON API. query is the raw query string without
 * '?'; authorization and admin_secret are the Authorization and
 * X-Admin-Secret header values (NULL when absent). Always produces a body,
 * including for 4xx/5xx statuses. */
CREC_API crec_status crec_engine_handle_request(crec_engine* engine, const char* method,
                                                const char* path, const char* query,
                                                const char* authorization, const char* admin_secret,
                                                const char* body, int* http_status,
                                                char** response_body);

/* limit <= 0 selects the default. model_path may be NULL to use the stored
 * ranking model. */
CREC_API crec_status crec_engine_recommend(crec_engine* engine, const char* user_id, int limit,
                                           const char* model_path, char** response_json);

CREC_API crec_status crec_engine_ingest(crec_engine* engine, const char* corpus_dir,
                                        char** report_json);

/* config_json may be NULL for defaults. Trains on the stored survey and
 * publishes the model. */
CREC_API crec_status crec_engine_train(crec_engine* engine, const char* config_json,
                                       char** job_json);

/* --- standalone tools ---------------------------------------------------- */

/* Writes <out_dir>/train.tsv and <out_dir>/test.tsv. */
CREC_API crec_status crec_gen_data(const char* catalog_dir, uint64_t seed, size_t n_train,
                                   size_t n_test, const char* out_dir, char** summary_json);

/* Trains on <survey_dir>/train.tsv, evaluates on <survey_dir>/test.tsv when
 * present and writes the checkpoint to model_out. */
CREC_API crec_status crec_train(const char* catalog_dir, const char* survey_dir,
                                const char* config_json, const char* model_out,
                                char** report_json);

/* configs: comma separated hidden-layer specs such as "32,40,32-16"; the
 * remaining settings come from base_config_json (may be NULL). */
CREC_API crec_status crec_sweep(const char* catalog_dir, const char* survey_dir,
                                const char* configs, const char* base_config_json,
                                char** results_json);

CREC_API crec_status crec_train_nb(const char* catalog_dir, const char* docs_dir,
                                   const char* labels_path, const char* model_out,
                                   char** summary_json);

CREC_API crec_status crec_extract_keywords(const char* doc_path, const char* vocab_path,
                                           const char* nb_model_path, char** keywords_json);

CREC_API crec_status crec_learn_rules(const char* provider_dir, char** rules_json);

#ifdef __cplusplus
}
#endif

#endif /* COURSEREC_H */
