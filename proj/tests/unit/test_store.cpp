#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <set>
#include <thread>

#include "error.hpp"
#include "keyphrase.hpp"
#include "ranker.hpp"
#include "store.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic_courses.hpp"
#include "survey.hpp"

using namespace courserec;
using courserec::testing::fixture_dir;
using courserec::testing::sample_profile;

namespace fs = std::filesystem;

namespace {

CatalogTexts fixture_texts() { return CatalogTexts::load(fixture_dir()); }

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> n{0};
    path = fs::temp_directory_path() /
           ("courserec-store-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Course course(std::string provider, std::string title, std::vector<TermId> kw = {}) {
  Course c;
  c.provider = std::move(provider);
  c.title = std::move(title);
  c.description = "About " + c.title;
  c.discipline = Discipline::Mechanical;
  c.keywords = std::move(kw);
  return c;
}

// A store with every kind of content, including both checkpoints.
void seed(Store& store) {
  const auto& catalog = *store.view()->catalog;
  SurveyOracle oracle(catalog);
  auto data = oracle.generate(7, 30, 10);
  std::vector<SurveyEntry> survey;
  for (auto& r : data.train) survey.push_back({r, Split::Train});
  for (auto& r : data.test) survey.push_back({r, Split::Test});
  TrainConfig cfg;
  cfg.hidden = {4};
  cfg.epochs = 3;
  auto mlp = train(data.train, cfg, catalog);
  auto nb = nb_train_from_documents(load_documents(fixture_dir() / "nb" / "docs"),
                                    load_keyphrase_labels(fixture_dir() / "nb" / "labels.tsv"),
                                    catalog.vocabulary);
  store.commit([&](Batch& b) {
    b.set_survey(survey);
    b.set_nb_checkpoint(save_nb_model(nb));
    b.set_ranker_checkpoint(save_mlp_model(mlp));
  });
  store.upsert_user(sample_profile(), std::string("tok-1"));
  auto other = sample_profile();
  other.user_id.clear();
  other.discipline = Discipline::Electrical;
  store.upsert_user(other, std::string("tok-2"));
  store.upsert_course(course("Hatch", "Pump Basics", {98}));
  store.upsert_course(course("Hatch", "Switchgear \"Live\" Work", {2, 98}));
}

}  // namespace

TEST_CASE("user upsert round trip and revisions") {
  Store store(fixture_texts());
  auto r0 = store.revision();
  auto p = sample_profile();
  p.user_id.clear();
  auto id = store.upsert_user(p, std::string("secret"));
  CHECK(store.revision() == r0 + 1);
  auto view = store.view();
  REQUIRE(view->find_user(id));
  p.user_id = id;
  CHECK(view->find_user(id)->profile == p);
  CHECK(view->find_user(id)->token == "secret");

  p.long_goal = 2;
  CHECK(store.upsert_user(p) == id);
  CHECK(store.revision() == r0 + 2);
  CHECK(store.view()->find_user(id)->token == "secret");
  CHECK(view->find_user(id)->profile.long_goal == 1);  // old views are immutable

  p.short_goal = 99;
  try {
    store.upsert_user(p);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(e.field() == "short_goal");
  }
  CHECK(store.revision() == r0 + 2);
}

TEST_CASE("course CRUD and (provider, title) uniqueness") {
  Store store(fixture_texts());
  auto id = store.upsert_course(course("Hatch", "Pump Basics", {98}));
  auto c = course("Hatch", "Pump Basics", {98});
  c.course_id = id;
  CHECK(*store.view()->find_course(id) == c);

  try {
    store.upsert_course(course("Hatch", "Pump Basics"));
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Conflict);
  }
  CHECK_NOTHROW(store.upsert_course(course("Other", "Pump Basics")));

  auto id2 = store.upsert_course(course("Hatch", "Fans"));
  auto renamed = *store.view()->find_course(id2);
  renamed.title = "Pump Basics";
  CHECK_THROWS_AS(store.upsert_course(renamed), Error);
  renamed.title = "Fans 2";
  store.upsert_course(renamed);
  CHECK(store.view()->find_course("Hatch", "Fans") == nullptr);
  CHECK(store.view()->find_course("Hatch", "Fans 2")->course_id == id2);

  store.delete_course(id);
  CHECK(store.view()->find_course(id) == nullptr);
  CHECK(store.view()->find_course("Hatch", "Pump Basics") == nullptr);
  CHECK_THROWS_AS(store.delete_course(id), Error);
  CHECK(validate_store(*store.view()).empty());

  auto bad = course("Hatch", "Bad", {1, 2, 3, 4});
  CHECK_THROWS_AS(store.upsert_course(bad), Error);
}

TEST_CASE("failed or empty batches publish nothing") {
  Store store(fixture_texts());
  auto before = store.snapshot();
  CHECK_THROWS(store.commit([](Batch& b) {
    b.upsert_course(course("A", "One"));
    b.upsert_course(course("A", "One"));
  }));
  CHECK(store.snapshot() == before);
  CHECK(store.commit([](Batch&) {}) == store.revision());
  CHECK(store.snapshot() == before);
}

TEST_CASE("snapshot round trip is byte identical") {
  Store store(fixture_texts());
  seed(store);
  auto text = store.snapshot();
  CHECK(store.snapshot() == text);  // deterministic

  Store copy(fixture_texts());
  copy.restore(text);
  CHECK(copy.snapshot() == text);
  auto a = store.view(), b = copy.view();
  CHECK(a->revision == b->revision);
  CHECK(a->users == b->users);
  CHECK(a->courses == b->courses);
  CHECK(a->survey == b->survey);
  CHECK(a->nb_checkpoint == b->nb_checkpoint);
  CHECK(a->ranker_checkpoint == b->ranker_checkpoint);
  CHECK(a->catalog_text == b->catalog_text);
  CHECK(save_mlp_model(load_mlp_model(*b->ranker_checkpoint)) == *b->ranker_checkpoint);
}

TEST_CASE("corrupt snapshots are rejected with line numbers") {
  Store store(fixture_texts());
  seed(store);
  auto text = store.snapshot();
  Store target(fixture_texts());
  target.upsert_course(course("X", "Y"));
  auto before = target.snapshot();

  std::vector<std::string> bad;
  bad.push_back(text.substr(0, text.size() / 2));
  bad.push_back(text.substr(0, text.rfind("end\n")));
  bad.push_back(text + "extra\n");
  bad.push_back("not a snapshot\n");
  std::string broken = text;
  broken.replace(broken.find("\"title\""), 7, "\"titl\"");
  bad.push_back(broken);
  for (const auto& t : bad) {
    try {
      target.restore(t);
      FAIL("expected a format error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Format);
      CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
    CHECK(target.snapshot() == before);
  }
}

TEST_CASE("directory store persists and reopens") {
  TempDir tmp;
  std::string text;
  {
    auto store = Store::create(tmp.path, fixture_texts());
    seed(*store);
    text = store->snapshot();
    CHECK(fs::exists(tmp.path / "users.jsonl"));
    CHECK(fs::exists(tmp.path / "models" / "ranker.ckpt"));
    CHECK_THROWS_AS(Store::create(tmp.path, fixture_texts()), Error);
  }
  auto reopened = Store::open(tmp.path);
  CHECK(reopened->snapshot() == text);

  // Restoring into a directory store rewrites its files.
  Store fresh(fixture_texts());
  reopened->restore(fresh.snapshot());
  CHECK(Store::open(tmp.path)->snapshot() == fresh.snapshot());
  CHECK(!fs::exists(tmp.path / "models" / "ranker.ckpt"));

  for (const auto& e : fs::recursive_directory_iterator(tmp.path))
    CHECK(e.path().string().find(".tmp.") == std::string::npos);
}

TEST_CASE("randomized operations keep the store consistent") {
  Store store(fixture_texts());
  const auto& catalog = *store.view()->catalog;
  auto pool = courserec::testing::synthetic_courses(catalog.vocabulary, 120, 5);
  std::mt19937_64 rng(99);
  std::map<std::string, Course> model_courses;
  std::map<std::string, UserProfile> model_users;
  std::uint64_t expected_rev = store.revision();
  for (int op = 0; op < 1000; ++op) {
    int kind = static_cast<int>(rng() % 4);
    try {
      if (kind == 0) {
        auto p = sample_profile();
        p.user_id.clear();
        p.discipline = static_cast<Discipline>(rng() % 3);
        p.professional_interests = {static_cast<TermId>(1 + rng() % catalog.vocabulary.size())};
        p.short_goal = static_cast<int>(1 + rng() % (catalog.goals.size() + 1));  // sometimes invalid
        auto id = store.upsert_user(p);
        p.user_id = id;
        model_users[id] = p;
        ++expected_rev;
      } else if (kind == 1) {
        Course c = pool[rng() % pool.size()];
        c.course_id.clear();
        c.keywords = {static_cast<TermId>(1 + rng() % catalog.vocabulary.size())};
        auto id = store.upsert_course(c);
        c.course_id = id;
        model_courses[id] = c;
        ++expected_rev;
      } else if (kind == 2 && !model_courses.empty()) {
        auto it = std::next(model_courses.begin(), static_cast<long>(rng() % model_courses.size()));
        Course c = it->second;
        c.description += " revised";
        store.upsert_course(c);
        it->second = c;
        ++expected_rev;
      } else if (kind == 3 && !model_courses.empty()) {
        auto it = std::next(model_courses.begin(), static_cast<long>(rng() % model_courses.size()));
        store.delete_course(it->first);
        model_courses.erase(it);
        ++expected_rev;
      }
    } catch (const Error& e) {
      CHECK((e.kind() == ErrorKind::Validation || e.kind() == ErrorKind::Conflict));
    }
    auto view = store.view();
    REQUIRE(validate_store(*view).empty());
    REQUIRE(view->revision == expected_rev);
  }
  auto view = store.view();
  CHECK(view->courses == model_courses);
  CHECK(view->users.size() == model_users.size());
  for (const auto& [id, p] : model_users) CHECK(view->find_user(id)->profile == p);

  Store copy(fixture_texts());
  copy.restore(store.snapshot());
  CHECK(copy.snapshot() == store.snapshot());
}

TEST_CASE("concurrent writers get distinct revisions") {
  Store store(fixture_texts());
  constexpr int kThreads = 4, kEach = 50;
  std::vector<std::vector<std::uint64_t>> seen(kThreads);
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < kEach; ++i) {
        auto p = sample_profile();
        p.user_id.clear();
        seen[t].push_back(store.commit([&](Batch& b) { b.upsert_user(p); }));
        auto v = store.view();  // readers never see a torn state
        if (!validate_store(*v).empty()) seen[t].push_back(0);
      }
    });
  }
  for (auto& th : threads) th.join();
  std::set<std::uint64_t> all;
  std::size_t total = 0;
  for (const auto& s : seen) {
    CHECK(std::is_sorted(s.begin(), s.end()));
    all.insert(s.begin(), s.end());
    total += s.size();
  }
  CHECK(total == kThreads * kEach);
  CHECK(all.size() == total);
  CHECK(*all.begin() == 1);
  CHECK(*all.rbegin() == kThreads * kEach);
  CHECK(store.view()->users.size() == kThreads * kEach);
}
