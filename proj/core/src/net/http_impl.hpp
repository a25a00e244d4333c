#pragma once

#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "poa/net/services.hpp"

namespace poa::net {

struct HttpService::Impl {
  httplib::Server server;
  int port = 0;
  std::thread thread;
};

int status_for(ErrorCode code);

// Runs the handler and writes its JSON result, or the mapped error.
void respond(httplib::Response& res, const std::function<nlohmann::json()>& handler);
void respond_text(httplib::Response& res, const std::string& content_type,
                  const std::function<std::string()>& handler);

nlohmann::json parse_body(const httplib::Request& req);
uint64_t query_u64(const httplib::Request& req, const std::string& name);
int64_t query_i64(const httplib::Request& req, const std::string& name);
std::string query_string(const httplib::Request& req, const std::string& name);

// Rethrows an error response body as the matching exception.
[[noreturn]] void throw_error_response(int status, const std::string& body);

}  // namespace poa::net
