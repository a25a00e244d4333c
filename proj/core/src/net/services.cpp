#include "poa/net/services.hpp"

#include "http_impl.hpp"
#include "poa/common/error.hpp"

namespace poa::net {

using nlohmann::json;

namespace {

std::unique_ptr<HttpService> with_key(std::unique_ptr<HttpService> svc, VerifyingKey key) {
  svc->impl().server.Get("/key", [key](const httplib::Request&, httplib::Response& res) {
    respond_text(res, "application/x-pem-file", [&] { return key.pem(); });
  });
  return svc;
}

}  // namespace

std::unique_ptr<HttpService> make_idp_service(std::shared_ptr<idp::IdentityProvider> idp,
                                              Clock clock, std::string public_url) {
  auto svc = std::make_unique<HttpService>();
  auto& s = svc->impl().server;
  s.Get("/.well-known/openid-configuration",
        [idp, public_url](const httplib::Request&, httplib::Response& res) {
          respond_text(res, "application/json",
                       [&] { return idp->discovery_document(public_url + "/jwks"); });
        });
  s.Get("/jwks", [idp](const httplib::Request&, httplib::Response& res) {
    respond_text(res, "application/json", [&] { return idp->jwks_document(); });
  });
  s.Post("/token", [idp, clock](const httplib::Request& req, httplib::Response& res) {
    respond_text(res, "application/jwt", [&] {
      const json body = parse_body(req);
      idp::TokenRequest tr;
      tr.sub = body.at("sub").get<std::string>();
      tr.aud = body.at("aud").get<std::string>();
      tr.lifetime = body.value("lifetime", tr.lifetime);
      if (tr.lifetime <= 0) fail(ErrorCode::kInvalidArgument, "lifetime must be positive");
      if (body.contains("nonce")) tr.nonce = body["nonce"].get<std::string>();
      if (body.contains("email")) tr.email = body["email"].get<std::string>();
      return idp->issue_token(tr, clock()).compact;
    });
  });
  s.Post("/rotate", [idp, clock](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      idp->rotate(clock());
      return json{{"rotation_counter", idp->rotation_counter()},
                  {"kid", idp->signing_public_key().key_id}};
    });
  });
  return svc;
}

std::unique_ptr<HttpService> make_ledger_service(std::shared_ptr<ledger::JwkLedger> ledger) {
  auto svc = std::make_unique<HttpService>();
  auto& s = svc->impl().server;
  s.Post("/append", [ledger](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const json body = parse_body(req);
      const jose::Jwks jwks = jose::Jwks::from_json(body.at("jwks").dump());
      return json(ledger->append(body.at("issuer").get<std::string>(), jwks));
    });
  });
  s.Get("/digest", [ledger](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] { return json(ledger->latest_digest()); });
  });
  s.Get("/inclusion", [ledger](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      return json(ledger->prove_inclusion(query_u64(req, "index"), query_u64(req, "size")));
    });
  });
  s.Get("/consistency", [ledger](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      return json(ledger->prove_consistency(query_u64(req, "old"), query_u64(req, "new")));
    });
  });
  s.Get("/at", [ledger](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      return json(ledger->query_at(query_string(req, "issuer"), query_i64(req, "t")));
    });
  });
  s.Get("/entries", [ledger](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] { return json(ledger->entries()); });
  });
  s.Post("/cosign", [ledger](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const json body = parse_body(req);
      ledger::Cosignature c;
      c.witness_id = body.at("witness_id").get<std::string>();
      c.signature = base64_decode(body.at("signature").get<std::string>());
      const ledger::SignedDigest digest = body.contains("digest")
                                              ? body["digest"].get<ledger::SignedDigest>()
                                              : ledger->latest_digest();
      ledger->add_cosignature(digest, c);
      return json{{"accepted", true}};
    });
  });
  return with_key(std::move(svc), ledger->public_key());
}

std::unique_ptr<HttpService> make_witness_service(std::shared_ptr<ledger::Witness> witness) {
  auto svc = std::make_unique<HttpService>();
  auto& s = svc->impl().server;
  s.Post("/cosign-request", [witness](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] { return json(witness->cosign(parse_body(req).get<ledger::CosignRequest>())); });
  });
  s.Get("/state", [witness](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      const auto pinned = witness->last_cosigned();
      return json{{"id", witness->id()}, {"pinned", pinned ? json(*pinned) : json(nullptr)}};
    });
  });
  return with_key(std::move(svc), witness->public_key());
}

std::unique_ptr<HttpService> make_ct_service(std::shared_ptr<ct::CtLog> log) {
  auto svc = std::make_unique<HttpService>();
  auto& s = svc->impl().server;
  s.Post("/submit", [log](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const Bytes tbs = base64_decode(parse_body(req).at("tbs").get<std::string>());
      return json(log->submit_precert(tbs));
    });
  });
  s.Get("/digest", [log](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] { return json(log->latest_tree_head()); });
  });
  s.Get("/inclusion", [log](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      return json(log->prove_inclusion(query_u64(req, "index"), query_u64(req, "size")));
    });
  });
  s.Get("/proof-by-hash", [log](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      return json(log->proof_by_hash(digest_from_hex(query_string(req, "hash")), query_u64(req, "size")));
    });
  });
  return with_key(std::move(svc), log->public_key());
}

std::unique_ptr<HttpService> make_ca_service(std::shared_ptr<ca::CertificateAuthority> ca) {
  auto svc = std::make_unique<HttpService>();
  auto& s = svc->impl().server;
  s.Post("/challenge", [ca](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const Bytes spki = base64_decode(parse_body(req).at("public_key").get<std::string>());
      return json{{"challenge", hex_encode(ca->new_challenge(spki))}};
    });
  });
  s.Post("/issue", [ca](const httplib::Request& req, httplib::Response& res) {
    respond_text(res, "application/x-pem-file", [&] {
      const json body = parse_body(req);
      ca::IssuanceRequest r;
      r.token = body.at("token").get<std::string>();
      r.subject_public_key = base64_decode(body.at("public_key").get<std::string>());
      if (body.contains("challenge")) r.challenge = hex_decode(body["challenge"].get<std::string>());
      r.proof_of_possession = base64_decode(body.at("pop").get<std::string>());
      return ca->issue(r).pem() + ca->root().pem();
    });
  });
  s.Get("/root", [ca](const httplib::Request&, httplib::Response& res) {
    respond_text(res, "application/x-pem-file", [&] { return ca->root().pem(); });
  });
  s.Post("/poll", [ca](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      const ca::PollResult p = ca->poll_jwks();
      return json{{"changed", p.changed}, {"degraded", p.degraded}};
    });
  });
  return svc;
}

}  // namespace poa::net
