#pragma once

#include <memory>
#include <string>

#include "poa/ca/ca_service.hpp"
#include "poa/common/clock.hpp"
#include "poa/ct/ct_log.hpp"
#include "poa/idp/idp_sim.hpp"
#include "poa/ledger/jwk_ledger.hpp"

namespace poa::net {

/// One service's HTTP/JSON front end. Errors are returned as
/// {"error": code, "reason": ..., "message": ...} with a 4xx/5xx status.
class HttpService {
 public:
  HttpService();
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds the listening socket; port 0 picks a free port. Throws kNetwork
  // when the address is in use.
  int bind(const std::string& host, int port);
  // Serves on the bound socket until stop().
  void serve();
  // serve() on a background thread.
  void start();
  void stop();
  int port() const;

  struct Impl;
  Impl& impl() { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

// GET /.well-known/openid-configuration, GET /jwks, POST /token, POST /rotate.
std::unique_ptr<HttpService> make_idp_service(std::shared_ptr<idp::IdentityProvider> idp,
                                              Clock clock, std::string public_url);

// POST /append, GET /digest, GET /inclusion, GET /consistency, GET /at,
// POST /cosign, GET /key.
std::unique_ptr<HttpService> make_ledger_service(std::shared_ptr<ledger::JwkLedger> ledger);

// POST /cosign-request, GET /key.
std::unique_ptr<HttpService> make_witness_service(std::shared_ptr<ledger::Witness> witness);

// POST /submit, GET /digest, GET /inclusion, GET /proof-by-hash, GET /key.
std::unique_ptr<HttpService> make_ct_service(std::shared_ptr<ct::CtLog> log);

// POST /challenge, POST /issue, GET /root, POST /poll.
std::unique_ptr<HttpService> make_ca_service(std::shared_ptr<ca::CertificateAuthority> ca);

}  // namespace poa::net
