// courserec command-line front end. Talks to the engine only through the C API.
#include <courserec/courserec.h>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

using nlohmann::json;

namespace {

#ifndef COURSEREC_DEFAULT_FIXTURES
#define COURSEREC_DEFAULT_FIXTURES "fixtures"
#endif

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

int report_failure(crec_status s) {
  std::cerr << "courserec: " << crec_status_name(s) << ": " << crec_last_error() << "\n";
  return kExitDomain;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  crec_free(s);
  return out;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct EngineHandle {
  crec_engine* e = nullptr;
  ~EngineHandle() { crec_engine_close(e); }
};

json config_json(const std::string& hidden, int epochs, double lr, uint64_t seed, double init_range) {
  return {{"hidden", hidden}, {"epochs", epochs}, {"learning_rate", lr}, {"seed", seed}, {"init_range", init_range}};
}

void print_report(const json& j) {
  if (!j.contains("report")) return;
  const auto& r = j["report"];
  std::cout << "rms_error " << fixed(r["rms_error"].get<double>()) << "\n"
            << "accuracy " << fixed(r["accuracy"].get<double>()) << "\n"
            << "n_test " << r["n_test"] << "\n";
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

std::string random_secret() {
  std::random_device rd;
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < 24; ++i) s.push_back(hex[rd() % 16]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Course recommendation engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(crec_version()));

  std::string fixtures = COURSEREC_DEFAULT_FIXTURES;
  auto add_fixtures = [&](CLI::App* sub) {
    sub->add_option("--fixtures", fixtures, "Fixture directory (vocab.tsv, tables/, nb/)")
        ->envname("COURSEREC_FIXTURES");
  };

  // init
  auto* init = app.add_subcommand("init", "Create a data directory with catalog, keyphrase model and survey");
  std::string data_dir;
  uint64_t survey_seed = 2009;
  size_t n_train = 250, n_test = 58;
  init->add_option("--data-dir", data_dir)->required()->envname("COURSEREC_DATA_DIR");
  init->add_option("--seed", survey_seed, "Survey seed");
  init->add_option("--train", n_train)->check(CLI::PositiveNumber);
  init->add_option("--test", n_test);
  add_fixtures(init);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic survey (train.tsv, test.tsv)");
  std::string out;
  gen->add_option("--seed", survey_seed);
  gen->add_option("--train", n_train)->check(CLI::PositiveNumber);
  gen->add_option("--test", n_test);
  gen->add_option("--out", out, "Output directory")->required();
  add_fixtures(gen);

  // train
  auto* train = app.add_subcommand("train", "Train the ranking network");
  std::string survey_dir, hidden = "32";
  int epochs = 400;
  double lr = 0.2, init_range = 0.5;
  uint64_t seed = 1;
  train->add_option("--data", survey_dir, "Survey directory from gen-data");
  train->add_option("--out", out, "Checkpoint path (with --data)");
  train->add_option("--data-dir", data_dir, "Train on a data directory's survey and publish the model");
  train->add_option("--hidden", hidden, "Hidden layers, e.g. 32 or 32-16");
  train->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
  train->add_option("--lr", lr)->check(CLI::PositiveNumber);
  train->add_option("--seed", seed);
  train->add_option("--init-range", init_range)->check(CLI::PositiveNumber);
  add_fixtures(train);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate several hidden-layer configurations");
  std::string configs = "32,40,32-16";
  sweep->add_option("--data", survey_dir)->required();
  sweep->add_option("--configs", configs);
  sweep->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
  sweep->add_option("--lr", lr)->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed);
  add_fixtures(sweep);

  // train-nb
  auto* train_nb = app.add_subcommand("train-nb", "Train the keyphrase model from indexed documents");
  std::string docs, labels;
  train_nb->add_option("--docs", docs, "Directory of <doc_id>.txt (default: fixtures nb/docs)");
  train_nb->add_option("--labels", labels, "doc_id, term_id, 1/0 (default: fixtures nb/labels.tsv)");
  train_nb->add_option("--out", out)->required();
  add_fixtures(train_nb);

  // extract-keywords
  auto* extract = app.add_subcommand("extract-keywords", "Up to three keyphrases for a document");
  std::string doc, vocab, nb_model;
  extract->add_option("--doc", doc)->required()->check(CLI::ExistingFile);
  extract->add_option("--vocab", vocab)->required()->check(CLI::ExistingFile);
  extract->add_option("--nb-model", nb_model)->required()->check(CLI::ExistingFile);

  // learn-rules
  auto* learn = app.add_subcommand("learn-rules", "Learn extraction rules for one provider directory");
  std::string corpus;
  learn->add_option("--corpus", corpus)->required()->check(CLI::ExistingDirectory);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Extract and integrate courses from a corpus");
  ingest->add_option("--corpus", corpus)->required()->check(CLI::ExistingDirectory);
  ingest->add_option("--data-dir", data_dir)->required()->envname("COURSEREC_DATA_DIR");

  // add-user
  auto* add_user = app.add_subcommand("add-user", "Register a user profile (JSON)");
  std::string profile;
  add_user->add_option("--data-dir", data_dir)->required()->envname("COURSEREC_DATA_DIR");
  add_user->add_option("--profile", profile, "Profile JSON")->required();

  // recommend
  auto* recommend = app.add_subcommand("recommend", "Ranked courses for a user");
  std::string user, model;
  int limit = 0;
  recommend->add_option("--user", user)->required();
  recommend->add_option("--data-dir", data_dir)->required()->envname("COURSEREC_DATA_DIR");
  recommend->add_option("--model", model, "Ranking checkpoint (default: the stored model)")
      ->check(CLI::ExistingFile);
  recommend->add_option("--limit", limit, "5..15, default 10");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "127.0.0.1", admin_secret, static_dir;
  int port = 8080;
  serve->add_option("--data-dir", data_dir)->required()->envname("COURSEREC_DATA_DIR");
  serve->add_option("--port", port)->envname("COURSEREC_PORT")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host);
  serve->add_option("--admin-secret", admin_secret)->envname("COURSEREC_ADMIN_SECRET");
  serve->add_option("--static-dir", static_dir, "Serve web UI files from this directory")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  char* result = nullptr;

  if (*init) {
    crec_status s = crec_init_data_dir(data_dir.c_str(), fixtures.c_str(), survey_seed, n_train, n_test, &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    std::cout << "data_dir " << data_dir << "\n"
              << "vocabulary " << j["vocabulary"] << "\n"
              << "survey_train " << j["survey_train"] << "\n"
              << "survey_test " << j["survey_test"] << "\n";
    return 0;
  }

  if (*gen) {
    crec_status s = crec_gen_data(fixtures.c_str(), survey_seed, n_train, n_test, out.c_str(), &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    std::cout << "seed " << survey_seed << "\n"
              << "train " << j["train"] << " " << j["train_path"].get<std::string>() << "\n"
              << "test " << j["test"] << " " << j["test_path"].get<std::string>() << "\n";
    return 0;
  }

  if (*train) {
    std::string cfg = config_json(hidden, epochs, lr, seed, init_range).dump();
    if (!data_dir.empty() && survey_dir.empty()) {
      EngineHandle h;
      crec_status s = crec_engine_open(data_dir.c_str(), &h.e);
      if (s == CREC_OK) s = crec_engine_train(h.e, cfg.c_str(), &result);
      if (s != CREC_OK) return report_failure(s);
      json j = json::parse(take(result));
      std::cout << "hidden " << hidden << "\n" << "n_train " << j["n_train"] << "\n";
      print_report(j);
      std::cout << "model_revision " << j["model_revision"].get<std::string>() << "\n";
      return 0;
    }
    if (survey_dir.empty() || out.empty() || !data_dir.empty()) {
      std::cerr << "courserec train: use either --data with --out, or --data-dir\n";
      return kExitUsage;
    }
    crec_status s = crec_train(fixtures.c_str(), survey_dir.c_str(), cfg.c_str(), out.c_str(), &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    std::cout << "hidden " << hidden << "\n" << "n_train " << j["n_train"] << "\n";
    print_report(j);
    std::cout << "model " << out << "\n"
              << "model_revision " << j["model_revision"].get<std::string>() << "\n";
    return 0;
  }

  if (*sweep) {
    std::string base = config_json("32", epochs, lr, seed, 0.5).dump();
    crec_status s = crec_sweep(fixtures.c_str(), survey_dir.c_str(), configs.c_str(), base.c_str(), &result);
    if (s != CREC_OK) return report_failure(s);
    json rows = json::parse(take(result));
    std::printf("%-10s %8s %8s %10s %10s %7s\n", "hidden", "epochs", "lr", "rms_error", "accuracy", "n_test");
    for (const auto& r : rows) {
      std::printf("%-10s %8d %8s %10s %10s %7d\n", r["config"]["hidden"].get<std::string>().c_str(),
                  r["config"]["epochs"].get<int>(), fixed(r["config"]["learning_rate"].get<double>(), 3).c_str(),
                  fixed(r["rms_error"].get<double>(), 4).c_str(), fixed(r["accuracy"].get<double>(), 4).c_str(),
                  r["n_test"].get<int>());
    }
    return 0;
  }

  if (*train_nb) {
    if (docs.empty()) docs = fixtures + "/nb/docs";
    if (labels.empty()) labels = fixtures + "/nb/labels.tsv";
    crec_status s = crec_train_nb(fixtures.c_str(), docs.c_str(), labels.c_str(), out.c_str(), &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    std::cout << "documents " << j["documents"] << "\n"
              << "positives " << j["positives"] << "\n"
              << "negatives " << j["negatives"] << "\n"
              << "model " << out << "\n";
    return 0;
  }

  if (*extract) {
    crec_status s = crec_extract_keywords(doc.c_str(), vocab.c_str(), nb_model.c_str(), &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    for (const auto& k : j["keywords"]) std::cout << k["id"] << "\t" << k["term"].get<std::string>() << "\n";
    std::cout << "discipline " << j["discipline"].get<std::string>() << "\n";
    return 0;
  }

  if (*learn) {
    crec_status s = crec_learn_rules(corpus.c_str(), &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    std::cout << "provider " << j["provider"].get<std::string>() << "\n"
              << "training_pages " << j["training_pages"] << "\n"
              << "pages " << j["pages"] << "\n"
              << "records " << j["records"] << "\n";
    for (const auto& r : j["rules"])
      std::cout << "rule " << r["field"].get<std::string>() << " prefix=" << r["prefix"].dump()
                << " suffix=" << r["suffix"].dump() << "\n";
    return 0;
  }

  if (*ingest) {
    EngineHandle h;
    crec_status s = crec_engine_open(data_dir.c_str(), &h.e);
    if (s == CREC_OK) s = crec_engine_ingest(h.e, corpus.c_str(), &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    std::cout << "added " << j["added"] << "\n"
              << "updated " << j["updated"] << "\n"
              << "skipped " << j["skipped"] << "\n"
              << "store_revision " << j["store_revision"] << "\n";
    for (const auto& w : j["warnings"]) std::cout << "warning " << w.get<std::string>() << "\n";
    return 0;
  }

  if (*add_user) {
    EngineHandle h;
    crec_status s = crec_engine_open(data_dir.c_str(), &h.e);
    int status = 0;
    if (s == CREC_OK)
      s = crec_engine_handle_request(h.e, "POST", "/api/users", nullptr, nullptr, nullptr, profile.c_str(),
                                     &status, &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    if (status != 201) {
      std::cerr << "courserec: " << j["error"]["code"].get<std::string>() << ": "
                << j["error"]["message"].get<std::string>() << "\n";
      return kExitDomain;
    }
    std::cout << "user_id " << j["user_id"].get<std::string>() << "\n"
              << "token " << j["token"].get<std::string>() << "\n";
    return 0;
  }

  if (*recommend) {
    EngineHandle h;
    crec_status s = crec_engine_open(data_dir.c_str(), &h.e);
    if (s == CREC_OK)
      s = crec_engine_recommend(h.e, user.c_str(), limit, model.empty() ? nullptr : model.c_str(), &result);
    if (s != CREC_OK) return report_failure(s);
    json j = json::parse(take(result));
    std::cout << "user " << j["user_id"].get<std::string>() << "\n"
              << "store_revision " << j["store_revision"] << "\n"
              << "model_revision " << j["model_revision"].get<std::string>() << "\n"
              << "limit " << j["limit"] << "\n";
    int pos = 0;
    for (const auto& item : j["items"])
      std::cout << ++pos << "\t" << item["course_id"].get<std::string>() << "\t" << item["predicted_rank"]
                << "\t" << fixed(item["score"].get<double>()) << "\t" << item["provider"].get<std::string>()
                << "\t" << item["title"].get<std::string>() << "\n";
    return 0;
  }

  if (*serve) {
    EngineHandle h;
    crec_status s = crec_engine_open(data_dir.c_str(), &h.e);
    if (s != CREC_OK) return report_failure(s);
    if (admin_secret.empty()) {
      admin_secret = random_secret();
      std::cerr << "admin secret " << admin_secret << "\n";
    }
    crec_engine_set_admin_secret(h.e, admin_secret.c_str());

    httplib::Server server;
    auto forward = [&](const httplib::Request& req, httplib::Response& res) {
      std::string query;
      if (auto q = req.target.find('?'); q != std::string::npos) query = req.target.substr(q + 1);
      std::string auth = req.get_header_value("Authorization");
      std::string admin = req.get_header_value("X-Admin-Secret");
      int status = 500;
      char* body = nullptr;
      crec_status rs = crec_engine_handle_request(h.e, req.method.c_str(), req.path.c_str(), query.c_str(),
                                                  auth.c_str(), admin.c_str(), req.body.c_str(), &status, &body);
      if (rs != CREC_OK) {
        res.status = 500;
        res.set_content(json{{"error", {{"code", "internal"}, {"message", crec_last_error()}}}}.dump(),
                        "application/json");
        return;
      }
      res.status = status;
      res.set_content(take(body), "application/json");
    };
    server.Get(R"(/api/.*)", forward);
    server.Post(R"(/api/.*)", forward);
    server.Put(R"(/api/.*)", forward);
    server.Delete(R"(/api/.*)", forward);
    if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
      std::cerr << "courserec: cannot serve " << static_dir << "\n";
      return kExitDomain;
    }
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    std::cerr << "listening on http://" << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
      std::cerr << "courserec: cannot listen on " << host << ":" << port << "\n";
      return kExitDomain;
    }
    return 0;
  }
  return kExitUsage;
}
