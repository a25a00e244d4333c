#include <chrono>
#include <cstdio>
#include <iostream>

#include "http_impl.hpp"
#include "poa/ca/ca_service.hpp"
#include "poa/common/error.hpp"

namespace poa::net {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownAtTime:
    case ErrorCode::kKeyNotFound:
      return 404;
    case ErrorCode::kKeysetMismatch:
      return 409;
    case ErrorCode::kLedgerUnavailable:
    case ErrorCode::kCtUnavailable:
    case ErrorCode::kDigestNotFresh:
    case ErrorCode::kNetwork:
      return 503;
    case ErrorCode::kCrypto:
      return 500;
    default:
      return 400;
  }
}

namespace {

void write_error(httplib::Response& res, ErrorCode code, const std::string& reason,
                 const std::string& message) {
  nlohmann::json body = {{"error", to_string(code)}, {"message", message}};
  if (!reason.empty()) body["reason"] = reason;
  res.status = status_for(code);
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ca::IssuanceError& e) {
    write_error(res, e.code(), e.reason(), e.what());
  } catch (const Error& e) {
    write_error(res, e.code(), "", e.what());
  } catch (const nlohmann::json::exception& e) {
    write_error(res, ErrorCode::kMalformed, "", std::string("bad request body: ") + e.what());
  } catch (const std::exception& e) {
    write_error(res, ErrorCode::kInvalidArgument, "", e.what());
  }
}

}  // namespace

void respond(httplib::Response& res, const std::function<nlohmann::json()>& handler) {
  guarded(res, [&] { res.set_content(handler().dump(), "application/json"); });
}

void respond_text(httplib::Response& res, const std::string& content_type,
                  const std::function<std::string()>& handler) {
  guarded(res, [&] { res.set_content(handler(), content_type); });
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("request body is not JSON: ") + e.what());
  }
}

std::string query_string(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) fail(ErrorCode::kInvalidArgument, "missing query parameter " + name);
  return req.get_param_value(name);
}

uint64_t query_u64(const httplib::Request& req, const std::string& name) {
  const std::string v = query_string(req, name);
  try {
    size_t used = 0;
    const unsigned long long out = std::stoull(v, &used);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, "query parameter " + name + " is not an unsigned integer");
  }
}

int64_t query_i64(const httplib::Request& req, const std::string& name) {
  const std::string v = query_string(req, name);
  try {
    size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, "query parameter " + name + " is not an integer");
  }
}

void throw_error_response(int status, const std::string& body) {
  ErrorCode code = status == 404 ? ErrorCode::kNotFound : ErrorCode::kNetwork;
  std::string message = "HTTP " + std::to_string(status);
  std::string reason;
  try {
    const nlohmann::json j = nlohmann::json::parse(body);
    if (auto c = error_code_from_string(j.value("error", ""))) code = *c;
    message = j.value("message", message);
    reason = j.value("reason", "");
  } catch (const nlohmann::json::exception&) {
  }
  if (!reason.empty()) throw ca::IssuanceError(code, reason, "");
  throw Error(code, message);
}

HttpService::HttpService() : impl_(std::make_unique<Impl>()) {
  // httplib's default also sets SO_REUSEPORT, which lets a second service
  // silently share a port that is already taken.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    const nlohmann::json line = {{"method", req.method}, {"path", req.path}, {"status", res.status}};
    std::cerr << line.dump() << std::endl;
  });
}

HttpService::~HttpService() {
  stop();
}

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
    if (impl_->port <= 0) fail(ErrorCode::kNetwork, "cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      fail(ErrorCode::kNetwork, "cannot bind " + host + ":" + std::to_string(port) + " (in use?)");
    }
    impl_->port = port;
  }
  return impl_->port;
}

void HttpService::serve() {
  impl_->server.listen_after_bind();
}

void HttpService::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpService::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpService::port() const {
  return impl_->port;
}

}  // namespace poa::net
