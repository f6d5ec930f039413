#include <doctest.h>

#include "service.hpp"
#include "support/engine_fixture.hpp"

using namespace courserec;
using courserec::testing::fixture_dir;
using courserec::testing::fixture_engine;
using nlohmann::json;

namespace {

constexpr const char* kSecret = "s3cret";

struct Client {
  Service& svc;

  HttpResponse call(std::string method, std::string target, std::string body = {},
                    std::string auth = {}, std::string admin = {}) {
    HttpRequest r;
    r.method = std::move(method);
    auto q = target.find('?');
    r.path = target.substr(0, q);
    if (q != std::string::npos) r.query = target.substr(q + 1);
    r.body = std::move(body);
    r.authorization = std::move(auth);
    r.admin_secret = std::move(admin);
    return svc.handle(r);
  }
};

const char* kProfile = R"({"discipline":"mechanical","professional_interests":[98],
  "personal_interests":[1,2,3],"experience":"junior","short_goal":1,"long_goal":2})";

json patched(const char* base, const json& patch) {
  json j = json::parse(base);
  j.merge_patch(patch);
  return j;
}

}  // namespace

TEST_CASE("user lifecycle and access control") {
  auto engine = fixture_engine(true);
  Service svc(*engine, kSecret);
  Client c{svc};

  auto created = c.call("POST", "/api/users", kProfile);
  REQUIRE(created.status == 201);
  auto j = json::parse(created.body);
  std::string id = j["user_id"], token = j["token"];
  CHECK(token.size() == 32);

  auto got = c.call("GET", "/api/users/" + id, "", "Bearer " + token);
  REQUIRE(got.status == 200);
  CHECK(json::parse(got.body)["profile"] == patched(kProfile, {{"user_id", id}}));

  auto other = json::parse(c.call("POST", "/api/users", kProfile).body);
  CHECK(c.call("GET", "/api/users/" + id, "", "Bearer " + other["token"].get<std::string>()).status == 403);
  CHECK(c.call("GET", "/api/users/" + id).status == 401);
  CHECK(c.call("GET", "/api/users/" + id, "", "", kSecret).status == 200);
  CHECK(c.call("GET", "/api/users/" + id, "", "Bearer " + std::string(kSecret)).status == 200);
  CHECK(c.call("GET", "/api/users/" + id + "/recommendations", "", "Bearer " + other["token"].get<std::string>()).status == 403);

  auto rec1 = c.call("GET", "/api/users/" + id + "/recommendations?limit=20", "", "Bearer " + token);
  REQUIRE(rec1.status == 200);
  auto r1 = json::parse(rec1.body);
  CHECK(r1["limit"] == 15);

  auto bad = c.call("PUT", "/api/users/" + id + "/profile",
                    patched(kProfile, {{"short_goal", 99}}).dump(), "Bearer " + token);
  CHECK(bad.status == 400);
  CHECK(json::parse(bad.body)["error"]["field"] == "short_goal");

  auto put = c.call("PUT", "/api/users/" + id + "/profile",
                    patched(kProfile, {{"professional_interests", {2}}}).dump(),
                    "Bearer " + token);
  REQUIRE(put.status == 200);
  auto rec2 = json::parse(c.call("GET", "/api/users/" + id + "/recommendations", "", "Bearer " + token).body);
  CHECK(rec2["store_revision"].get<std::uint64_t>() > r1["store_revision"].get<std::uint64_t>());
  CHECK(rec2["limit"] == 10);

  CHECK(c.call("POST", "/api/users", "{not json").status == 400);
  CHECK(c.call("GET", "/api/users/u999999", "", "", kSecret).status == 404);
}

TEST_CASE("no model means 503") {
  auto engine = fixture_engine(false);
  Service svc(*engine, kSecret);
  Client c{svc};
  auto j = json::parse(c.call("POST", "/api/users", kProfile).body);
  auto r = c.call("GET", "/api/users/" + j["user_id"].get<std::string>() + "/recommendations", "",
                  "Bearer " + j["token"].get<std::string>());
  CHECK(r.status == 503);
  CHECK(json::parse(r.body)["error"]["message"].get<std::string>().find("train") != std::string::npos);
  CHECK(json::parse(c.call("GET", "/api/health").body)["model_revision"].is_null());
}

TEST_CASE("admin endpoints") {
  auto engine = fixture_engine(false);
  Service svc(*engine, kSecret);
  Client c{svc};
  std::string corpus = json{{"corpus_dir", (fixture_dir() / "corpus").string()}}.dump();

  CHECK(c.call("POST", "/api/admin/ingest", corpus).status == 401);
  CHECK(c.call("POST", "/api/admin/ingest", corpus, "", "wrong").status == 403);
  auto ing = c.call("POST", "/api/admin/ingest", corpus, "", kSecret);
  REQUIRE(ing.status == 200);
  auto rep = json::parse(ing.body);
  CHECK(rep["added"].get<int>() > 0);
  auto again = json::parse(c.call("POST", "/api/admin/ingest", corpus, "", kSecret).body);
  CHECK(again["added"] == 0);
  CHECK(again["skipped"] == rep["added"]);
  CHECK(c.call("POST", "/api/admin/ingest", R"({"corpus_dir":"/no/such/dir"})", "", kSecret).status == 400);

  std::string course = R"({"provider":"Acme","title":"Pump Basics","description":"pump care"})";
  auto made = c.call("POST", "/api/admin/courses", course, "", kSecret);
  REQUIRE(made.status == 201);
  std::string cid = json::parse(made.body)["course"]["course_id"];
  CHECK(c.call("POST", "/api/admin/courses", course, "", kSecret).status == 409);
  auto one = c.call("GET", "/api/courses/" + cid);
  REQUIRE(one.status == 200);
  CHECK(json::parse(one.body)["description"] == "pump care");
  CHECK(c.call("GET", "/api/courses/nope").status == 404);

  auto found = json::parse(c.call("GET", "/api/courses/search?q=pump+care&limit=50").body);
  bool listed = false;
  for (const auto& item : found["items"]) listed = listed || item["course_id"] == cid;
  CHECK(listed);
  auto elec = json::parse(c.call("GET", "/api/courses/search?q=pump&discipline=electrical&limit=50").body);
  for (const auto& item : elec["items"]) CHECK(item["discipline"] != "mechanical");
  CHECK(c.call("GET", "/api/courses/search?q=pump&discipline=civil").status == 400);

  CHECK(c.call("DELETE", "/api/admin/courses/" + cid, "", "", kSecret).status == 200);
  CHECK(c.call("GET", "/api/courses/" + cid).status == 404);

  auto trained = c.call("POST", "/api/admin/train",
                        R"({"config":{"hidden":"4","epochs":3},"wait":true})", "", kSecret);
  REQUIRE(trained.status == 200);
  auto job = json::parse(trained.body);
  CHECK(job["state"] == "succeeded");
  CHECK(job["report"]["n_test"] == 30);
  auto health = json::parse(c.call("GET", "/api/health").body);
  CHECK(health["model_revision"] == job["model_revision"]);

  auto queued = c.call("POST", "/api/admin/train", R"({"config":{"hidden":[4],"epochs":3}})", "", kSecret);
  REQUIRE(queued.status == 202);
  engine->wait_for_jobs();
  auto polled = c.call("GET", "/api/admin/jobs/" + std::to_string(json::parse(queued.body)["job_id"].get<int>()),
                       "", "", kSecret);
  CHECK(json::parse(polled.body)["state"] == "succeeded");
  CHECK(c.call("POST", "/api/admin/train", R"({"config":{"epochs":0}})", "", kSecret).status == 400);

  auto tables = json::parse(c.call("GET", "/api/meta/tables").body);
  CHECK(tables["vocabulary"].size() == 233);
  CHECK(tables["goals"].size() == 8);
  CHECK(c.call("GET", "/api/nothing").status == 404);
  CHECK(c.call("PATCH", "/api/health").status == 404);
}

TEST_CASE("admin disabled without a secret") {
  auto engine = fixture_engine(false);
  Service svc(*engine, "");
  Client c{svc};
  CHECK(c.call("POST", "/api/admin/train", "{}", "Bearer ", "").status == 403);
}

TEST_CASE("query parsing") {
  auto q = parse_query("q=pump+care%21&limit=5&flag");
  CHECK(q["q"] == "pump care!");
  CHECK(q["limit"] == "5");
  CHECK(q.count("flag"));
  CHECK(parse_query("a=%zz")["a"] == "%zz");
}
