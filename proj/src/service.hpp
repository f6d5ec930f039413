#pragma once

#include <map>
#include <string>

#include "engine.hpp"
#include "error.hpp"

namespace courserec {

struct HttpRequest {
  std::string method;
  std::string path;
  std::string query;          // raw, without '?'
  std::string authorization;  // Authorization header value
  std::string admin_secret;   // X-Admin-Secret header value
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// Status code for an error kind.
int http_status(ErrorKind kind);

// Percent-decoded key/value pairs of a query string.
std::map<std::string, std::string> parse_query(std::string_view query);

// The JSON API. Users authenticate with the bearer token issued at creation;
// admin endpoints need the server secret (as X-Admin-Secret or a bearer
// token). An empty secret disables admin endpoints.
class Service {
 public:
  Service(Engine& engine, std::string admin_secret)
      : engine_(engine), admin_secret_(std::move(admin_secret)) {}

  HttpResponse handle(const HttpRequest& req);

 private:
  Engine& engine_;
  std::string admin_secret_;
};

}  // namespace courserec
