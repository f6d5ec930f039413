#include "service.hpp"

#include <algorithm>
#include <random>

#include "error.hpp"
#include "io.hpp"
#include "text.hpp"

namespace courserec {

namespace fs = std::filesystem;
using nlohmann::json;

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::Format:
    case ErrorKind::Encoding:
    case ErrorKind::Rule: return 400;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Conflict: return 409;
    case ErrorKind::Unavailable: return 503;
    case ErrorKind::Io:
    case ErrorKind::Training:
    case ErrorKind::Internal: return 500;
  }
  return 500;
}

namespace {

std::string_view error_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::NotFound: return "not_found";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::Unavailable: return "unavailable";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Encoding: return "encoding";
    case ErrorKind::Training: return "training";
    case ErrorKind::Rule: return "rule";
    case ErrorKind::Internal: return "internal";
  }
  return "internal";
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 &&
               hex_value(s[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2])));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

HttpResponse reply(int status, const json& body) { return {status, body.dump()}; }

HttpResponse error_reply(int status, std::string_view code, const std::string& message,
                         const std::string& field = {}) {
  json e = {{"code", code}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  return reply(status, {{"error", e}});
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body.empty() ? "{}" : body);
  } catch (const json::exception&) {
    throw Error(ErrorKind::Validation, "request body is not valid JSON", "body");
  }
}

std::optional<long> int_param(const std::map<std::string, std::string>& q, const std::string& name) {
  auto it = q.find(name);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  try {
    return parse_long(it->second);
  } catch (const Error&) {
    throw Error(ErrorKind::Validation, name + " must be an integer", name);
  }
}

std::optional<Discipline> discipline_param(const std::map<std::string, std::string>& q) {
  auto it = q.find("discipline");
  if (it == q.end() || it->second.empty()) return std::nullopt;
  try {
    return parse_discipline(it->second);
  } catch (const Error&) {
    throw Error(ErrorKind::Validation, "discipline must be electrical, mechanical or both",
                "discipline");
  }
}

std::string new_token() {
  std::random_device rd;
  std::string out;
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 32; ++i) out.push_back(hex[rd() % 16]);
  return out;
}

std::string bearer(const std::string& authorization) {
  constexpr std::string_view prefix = "Bearer ";
  if (authorization.rfind(prefix, 0) != 0) return {};
  return trim(std::string_view(authorization).substr(prefix.size()));
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  return diff == 0;
}

json course_summary(const Course& c) {
  json j = course_to_json(c);
  j.erase("description");
  return j;
}

json tables_json(const Catalog& c) {
  json vocab = json::array(), goals = json::array(), interests = json::array();
  for (const auto& e : c.vocabulary.entries())
    vocab.push_back({{"id", e.id}, {"term", e.term}, {"discipline", to_string(e.discipline)}});
  for (int i = 1; i <= static_cast<int>(c.goals.size()); ++i)
    goals.push_back({{"id", i}, {"label", c.goals.label(i)}});
  for (int i = 1; i <= static_cast<int>(c.interests.size()); ++i)
    interests.push_back({{"id", i}, {"label", c.interests.label(i)}});
  json experience = json::array();
  for (int i = 1; i <= 4; ++i)
    experience.push_back({{"id", i}, {"label", to_string(static_cast<Experience>(i))}});
  return {{"vocabulary", vocab},
          {"goals", goals},
          {"interests", interests},
          {"experience", experience},
          {"disciplines", {"electrical", "mechanical", "both"}}};
}

}  // namespace

std::map<std::string, std::string> parse_query(std::string_view query) {
  std::map<std::string, std::string> out;
  for (const auto& part : split(query, '&')) {
    if (part.empty()) continue;
    auto eq = part.find('=');
    if (eq == std::string::npos) out[percent_decode(part)] = "";
    else out[percent_decode(part.substr(0, eq))] = percent_decode(part.substr(eq + 1));
  }
  return out;
}

HttpResponse Service::handle(const HttpRequest& req) {
  auto segments = split(req.path, '/');
  segments.erase(std::remove(segments.begin(), segments.end(), std::string()), segments.end());
  const auto q = parse_query(req.query);
  const std::string& m = req.method;
  auto is = [&](std::initializer_list<std::string_view> pattern) {
    if (segments.size() != pattern.size()) return false;
    std::size_t i = 0;
    for (auto p : pattern) {
      if (p != "*" && segments[i] != p) return false;
      ++i;
    }
    return true;
  };

  // Credentials, checked per route.
  std::string token = bearer(req.authorization);
  bool is_admin = !admin_secret_.empty() &&
                  (constant_time_equal(req.admin_secret, admin_secret_) ||
                   constant_time_equal(token, admin_secret_));
  auto require_admin = [&]() -> std::optional<HttpResponse> {
    if (is_admin) return std::nullopt;
    if (admin_secret_.empty()) return error_reply(403, "forbidden", "admin endpoints are disabled");
    if (req.admin_secret.empty() && token.empty())
      return error_reply(401, "unauthorized", "admin secret required");
    return error_reply(403, "forbidden", "admin secret does not match");
  };
  auto require_user = [&](const std::string& user_id) -> std::optional<HttpResponse> {
    if (is_admin) return std::nullopt;
    auto view = engine_.store().view();
    const UserRecord* u = view->find_user(user_id);
    if (token.empty()) return error_reply(401, "unauthorized", "bearer token required");
    if (!u) return error_reply(404, "not_found", "no user " + user_id, "user_id");
    if (u->token.empty() || !constant_time_equal(token, u->token))
      return error_reply(403, "forbidden", "token does not grant access to this user");
    return std::nullopt;
  };

  try {
    if (segments.empty() || segments[0] != "api")
      return error_reply(404, "not_found", "no such endpoint " + req.path);

    if (is({"api", "health"}) && m == "GET") {
      auto view = engine_.store().view();
      std::string rev = engine_.model_revision();
      return reply(200, {{"status", "ok"},
                         {"store_revision", view->revision},
                         {"model_revision", rev.empty() ? json(nullptr) : json(rev)},
                         {"keyphrase_model", view->nb_checkpoint.has_value()},
                         {"users", view->users.size()},
                         {"courses", view->courses.size()}});
    }
    if (is({"api", "meta", "tables"}) && m == "GET")
      return reply(200, tables_json(*engine_.store().view()->catalog));

    if (is({"api", "users"}) && m == "POST") {
      UserProfile p = profile_from_json(parse_body(req.body));
      p.user_id.clear();
      std::string tok = new_token();
      std::string id = engine_.store().upsert_user(p, tok);
      auto view = engine_.store().view();
      return reply(201, {{"user_id", id},
                         {"token", tok},
                         {"profile", profile_to_json(view->find_user(id)->profile)},
                         {"store_revision", view->revision}});
    }
    if (is({"api", "users", "*"}) && m == "GET") {
      if (auto denied = require_user(segments[2])) return *denied;
      auto view = engine_.store().view();
      const UserRecord* u = view->find_user(segments[2]);
      if (!u) return error_reply(404, "not_found", "no user " + segments[2], "user_id");
      return reply(200, {{"user_id", u->profile.user_id},
                         {"profile", profile_to_json(u->profile)},
                         {"store_revision", view->revision}});
    }
    if (is({"api", "users", "*", "profile"}) && m == "PUT") {
      if (auto denied = require_user(segments[2])) return *denied;
      if (!engine_.store().view()->find_user(segments[2]))
        return error_reply(404, "not_found", "no user " + segments[2], "user_id");
      UserProfile p = profile_from_json(parse_body(req.body));
      p.user_id = segments[2];
      engine_.store().upsert_user(p);
      auto view = engine_.store().view();
      return reply(200, {{"user_id", p.user_id},
                         {"profile", profile_to_json(view->find_user(p.user_id)->profile)},
                         {"store_revision", view->revision}});
    }
    if (is({"api", "users", "*", "recommendations"}) && m == "GET") {
      if (auto denied = require_user(segments[2])) return *denied;
      auto r = engine_.recommend(segments[2], int_param(q, "limit"));
      json body = to_json(r);
      body["limit"] = clamp_recommendation_limit(int_param(q, "limit"));
      return reply(200, body);
    }

    if (is({"api", "courses", "search"}) && m == "GET") {
      long limit = std::clamp<long>(int_param(q, "limit").value_or(20), 1, 50);
      auto it = q.find("q");
      std::string text = it == q.end() ? "" : it->second;
      json items = json::array();
      for (const auto& hit : engine_.search(text, discipline_param(q), static_cast<std::size_t>(limit))) {
        json j = course_summary(hit.course);
        j["score"] = hit.score;
        items.push_back(j);
      }
      return reply(200, {{"query", text},
                         {"items", items},
                         {"store_revision", engine_.store().revision()}});
    }
    if (is({"api", "courses"}) && m == "GET") {
      long limit = std::clamp<long>(int_param(q, "limit").value_or(100), 1, 1000);
      auto view = engine_.store().view();
      json items = json::array();
      for (const auto& [id, c] : view->courses) {
        if (static_cast<long>(items.size()) >= limit) break;
        items.push_back(course_summary(c));
      }
      return reply(200, {{"items", items},
                         {"total", view->courses.size()},
                         {"store_revision", view->revision}});
    }
    if (is({"api", "courses", "*"}) && m == "GET") {
      auto view = engine_.store().view();
      const Course* c = view->find_course(segments[2]);
      if (!c) return error_reply(404, "not_found", "no course " + segments[2], "course_id");
      json j = course_to_json(*c);
      json terms = json::array();
      for (TermId k : c->keywords) terms.push_back(view->catalog->vocabulary.at(k).term);
      j["keyword_terms"] = terms;
      return reply(200, j);
    }

    if (segments.size() >= 2 && segments[1] == "admin") {
      if (auto denied = require_admin()) return *denied;

      if (is({"api", "admin", "courses"}) && m == "POST") {
        Course c = course_from_json(parse_body(req.body));
        if (!c.course_id.empty() && engine_.store().view()->find_course(c.course_id))
          throw Error(ErrorKind::Conflict, "course " + c.course_id + " already exists", "course_id");
        std::string id = engine_.put_course(c);
        auto view = engine_.store().view();
        return reply(201, {{"course", course_to_json(*view->find_course(id))},
                           {"store_revision", view->revision}});
      }
      if (is({"api", "admin", "courses", "*"}) && m == "PUT") {
        if (!engine_.store().view()->find_course(segments[3]))
          return error_reply(404, "not_found", "no course " + segments[3], "course_id");
        Course c = course_from_json(parse_body(req.body));
        c.course_id = segments[3];
        engine_.put_course(c);
        auto view = engine_.store().view();
        return reply(200, {{"course", course_to_json(*view->find_course(segments[3]))},
                           {"store_revision", view->revision}});
      }
      if (is({"api", "admin", "courses", "*"}) && m == "DELETE") {
        engine_.store().delete_course(segments[3]);
        return reply(200, {{"deleted", segments[3]}, {"store_revision", engine_.store().revision()}});
      }
      if (is({"api", "admin", "ingest"}) && m == "POST") {
        json body = parse_body(req.body);
        if (!body.contains("corpus_dir") || !body["corpus_dir"].is_string())
          throw Error(ErrorKind::Validation, "corpus_dir is required", "corpus_dir");
        fs::path dir = body["corpus_dir"].get<std::string>();
        if (!fs::is_directory(dir))
          throw Error(ErrorKind::Validation, "corpus_dir is not a directory: " + dir.string(),
                      "corpus_dir");
        return reply(200, to_json(engine_.ingest(dir)));
      }
      if (is({"api", "admin", "train"}) && m == "POST") {
        json body = parse_body(req.body);
        TrainConfig cfg = train_config_from_json(body.value("config", json(nullptr)));
        if (body.value("wait", false)) return reply(200, to_json(engine_.train(cfg)));
        std::uint64_t id = engine_.start_train_job(cfg);
        return reply(202, to_json(*engine_.job(id)));
      }
      if (is({"api", "admin", "jobs", "*"}) && m == "GET") {
        std::optional<TrainJob> job;
        try {
          job = engine_.job(static_cast<std::uint64_t>(parse_long(segments[3])));
        } catch (const Error&) {
        }
        if (!job) return error_reply(404, "not_found", "no job " + segments[3], "job_id");
        return reply(200, to_json(*job));
      }
      if (is({"api", "admin", "users"}) && m == "GET") {
        auto view = engine_.store().view();
        json items = json::array();
        for (const auto& [id, u] : view->users) items.push_back(profile_to_json(u.profile));
        return reply(200, {{"items", items}, {"store_revision", view->revision}});
      }
    }
    return error_reply(404, "not_found", "no such endpoint " + m + " " + req.path);
  } catch (const Error& e) {
    return error_reply(http_status(e.kind()), error_code(e.kind()), e.what(), e.field());
  } catch (const std::exception& e) {
    return error_reply(500, "internal", e.what());
  }
}

}  // namespace courserec
