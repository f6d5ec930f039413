// Exercises the shared library through its C header only.
#include <doctest.h>

#include <courserec/courserec.h>
#include <unistd.h>

#include <filesystem>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = COURSEREC_FIXTURE_DIR;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("courserec-capi-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Takes ownership of a returned string.
std::string take(char* s) {
  std::string out = s ? s : "";
  crec_free(s);
  return out;
}

struct Request {
  int status = 0;
  json body;
};

Request call(crec_engine* e, const char* method, const char* path, const char* query = nullptr,
             const char* auth = nullptr, const char* admin = nullptr, const char* body = nullptr) {
  Request r;
  char* out = nullptr;
  REQUIRE(crec_engine_handle_request(e, method, path, query, auth, admin, body, &r.status, &out) == CREC_OK);
  r.body = json::parse(take(out));
  return r;
}

}  // namespace

TEST_CASE("argument checks and error reporting") {
  CHECK(std::string(crec_version()).size() > 0);
  CHECK(std::string(crec_status_name(CREC_ERR_UNAVAILABLE)) == "unavailable");
  CHECK(crec_engine_open("x", nullptr) == CREC_ERR_ARGUMENT);
  crec_engine* e = nullptr;
  CHECK(crec_engine_open("/no/such/dir", &e) == CREC_ERR_IO);
  CHECK(e == nullptr);
  CHECK(std::string(crec_last_error()).find("/no/such/dir") != std::string::npos);
  CHECK(crec_engine_recommend(nullptr, "u", 0, nullptr, nullptr) == CREC_ERR_ARGUMENT);
  CHECK(crec_learn_rules(nullptr, nullptr) == CREC_ERR_VALIDATION);
  CHECK(std::string(crec_last_error_field()) == "corpus");
  crec_engine_close(nullptr);
  crec_free(nullptr);
}

TEST_CASE("data directory lifecycle") {
  TempDir tmp("life");
  char* out = nullptr;
  REQUIRE(crec_init_data_dir(tmp.path.c_str(), kFixtures.c_str(), 2009, 80, 20, &out) == CREC_OK);
  auto summary = json::parse(take(out));
  CHECK(summary["survey_train"] == 80);
  CHECK(crec_init_data_dir(tmp.path.c_str(), kFixtures.c_str(), 2009, 80, 20, nullptr) == CREC_ERR_CONFLICT);

  crec_engine* e = nullptr;
  REQUIRE(crec_engine_open(tmp.path.c_str(), &e) == CREC_OK);
  REQUIRE(crec_engine_set_admin_secret(e, "adm") == CREC_OK);

  auto health = call(e, "GET", "/api/health");
  CHECK(health.status == 200);
  CHECK(health.body["model_revision"].is_null());

  auto user = call(e, "POST", "/api/users", nullptr, nullptr, nullptr,
                   R"({"discipline":"mechanical","professional_interests":[98],"personal_interests":[1,2,3],
                       "experience":2,"short_goal":1,"long_goal":1})");
  REQUIRE(user.status == 201);
  std::string uid = user.body["user_id"];

  CHECK(crec_engine_recommend(e, uid.c_str(), 0, nullptr, &out) == CREC_ERR_UNAVAILABLE);
  CHECK(std::string(crec_last_error()).find("train") != std::string::npos);

  REQUIRE(crec_engine_ingest(e, (kFixtures / "corpus").c_str(), &out) == CREC_OK);
  auto report = json::parse(take(out));
  CHECK(report["added"].get<int>() > 0);
  REQUIRE(crec_engine_ingest(e, (kFixtures / "corpus").c_str(), &out) == CREC_OK);
  CHECK(json::parse(take(out))["added"] == 0);

  REQUIRE(crec_engine_train(e, R"({"hidden":"8","epochs":20})", &out) == CREC_OK);
  auto job = json::parse(take(out));
  CHECK(job["state"] == "succeeded");
  CHECK(crec_engine_train(e, R"({"epochs":0})", &out) == CREC_ERR_VALIDATION);
  CHECK(std::string(crec_last_error_field()) == "epochs");

  REQUIRE(crec_engine_recommend(e, uid.c_str(), 20, nullptr, &out) == CREC_OK);
  auto rec = json::parse(take(out));
  CHECK(rec["limit"] == 15);
  CHECK(rec["model_revision"] == job["model_revision"]);
  CHECK(crec_engine_recommend(e, "u404", 0, nullptr, &out) == CREC_ERR_NOT_FOUND);
  crec_engine_close(e);

  // Everything above is durable.
  REQUIRE(crec_engine_open(tmp.path.c_str(), &e) == CREC_OK);
  REQUIRE(crec_engine_recommend(e, uid.c_str(), 20, nullptr, &out) == CREC_OK);
  CHECK(json::parse(take(out)) == rec);
  auto admin = call(e, "GET", "/api/admin/users", nullptr, nullptr, "adm");
  CHECK(admin.status == 403);  // secret is per handle
  crec_engine_close(e);
}

TEST_CASE("standalone tools") {
  TempDir tmp("tools");
  char* out = nullptr;
  auto survey = tmp.path / "survey";
  REQUIRE(crec_gen_data(kFixtures.c_str(), 3, 60, 20, survey.c_str(), &out) == CREC_OK);
  CHECK(json::parse(take(out))["test"] == 20);
  CHECK(fs::exists(survey / "train.tsv"));

  auto model = tmp.path / "ranker.ckpt";
  REQUIRE(crec_train(kFixtures.c_str(), survey.c_str(), R"({"hidden":"4","epochs":5})", model.c_str(), &out) == CREC_OK);
  auto trained = json::parse(take(out));
  CHECK(trained["report"]["n_test"] == 20);
  CHECK(fs::exists(model));

  REQUIRE(crec_sweep(kFixtures.c_str(), survey.c_str(), "4,6,4-2", R"({"epochs":3})", &out) == CREC_OK);
  auto rows = json::parse(take(out));
  REQUIRE(rows.size() == 3);
  CHECK(rows[2]["config"]["hidden"] == "4-2");
  CHECK(crec_sweep(kFixtures.c_str(), survey.c_str(), "4", nullptr, &out) == CREC_ERR_VALIDATION);

  auto nb = tmp.path / "nb.ckpt";
  REQUIRE(crec_train_nb(kFixtures.c_str(), (kFixtures / "nb" / "docs").c_str(),
                        (kFixtures / "nb" / "labels.tsv").c_str(), nb.c_str(), &out) == CREC_OK);
  take(out);
  REQUIRE(crec_extract_keywords((kFixtures / "nb" / "docs" / "doc01.txt").c_str(),
                                (kFixtures / "vocab.tsv").c_str(), nb.c_str(), &out) == CREC_OK);
  auto kw = json::parse(take(out));
  CHECK(kw["keywords"].size() >= 1);
  CHECK(kw["keywords"].size() <= 3);

  REQUIRE(crec_learn_rules((kFixtures / "corpus" / "hatch_academy").c_str(), &out) == CREC_OK);
  auto rules = json::parse(take(out));
  CHECK(rules["rules"].size() == 3);
  CHECK(rules["pages"].get<int>() >= 5);
}
