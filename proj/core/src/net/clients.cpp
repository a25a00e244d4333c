#include "poa/net/clients.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "http_impl.hpp"
#include "poa/common/error.hpp"

namespace poa::net {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& base_url) {
  httplib::Client c(base_url);
  c.set_connection_timeout(5, 0);
  c.set_read_timeout(60, 0);
  c.set_write_timeout(30, 0);
  return c;
}

std::string checked_body(const httplib::Result& res, const std::string& url) {
  if (!res) {
    fail(ErrorCode::kNetwork, "cannot reach " + url + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) throw_error_response(res->status, res->body);
  return res->body;
}

json parse_json(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorCode::kDecode, std::string("response is not JSON: ") + e.what());
  }
}

std::string query(std::initializer_list<std::pair<std::string, std::string>> params) {
  httplib::Params p;
  for (const auto& [k, v] : params) p.emplace(k, v);
  return "?" + httplib::detail::params_to_query_str(p);
}

}  // namespace

JsonClient::JsonClient(std::string base_url) : base_url_(std::move(base_url)) {}
JsonClient::~JsonClient() = default;

std::string JsonClient::get_text(const std::string& path) const {
  auto c = make_client(base_url_);
  return checked_body(c.Get(path), base_url_ + path);
}

json JsonClient::get(const std::string& path) const {
  return parse_json(get_text(path));
}

json JsonClient::post(const std::string& path, const json& body) const {
  auto c = make_client(base_url_);
  return parse_json(checked_body(c.Post(path, body.dump(), "application/json"), base_url_ + path));
}

jose::Jwks HttpJwksSource::fetch_jwks(const std::string&) {
  return jose::Jwks::from_json(client_.get_text("/jwks"));
}

std::string HttpIdp::token(const idp::TokenRequest& req) const {
  json body = {{"sub", req.sub}, {"aud", req.aud}, {"lifetime", req.lifetime}};
  if (req.nonce) body["nonce"] = *req.nonce;
  if (req.email) body["email"] = *req.email;
  auto c = make_client(client_.base_url());
  return checked_body(c.Post("/token", body.dump(), "application/json"), client_.base_url() + "/token");
}

uint64_t HttpIdp::rotate() const {
  return client_.post("/rotate", json::object()).at("rotation_counter").get<uint64_t>();
}

ledger::AppendResult HttpLedger::append(const std::string& issuer, const jose::Jwks& jwks) {
  return client_.post("/append", {{"issuer", issuer}, {"jwks", json::parse(jwks.to_json())}})
      .get<ledger::AppendResult>();
}

ledger::SignedDigest HttpLedger::latest_digest() {
  return client_.get("/digest").get<ledger::SignedDigest>();
}

merkle::InclusionProof HttpLedger::prove_inclusion(uint64_t index, uint64_t tree_size) {
  return client_
      .get("/inclusion" + query({{"index", std::to_string(index)}, {"size", std::to_string(tree_size)}}))
      .get<merkle::InclusionProof>();
}

merkle::ConsistencyProof HttpLedger::prove_consistency(uint64_t old_size, uint64_t new_size) {
  return client_
      .get("/consistency" + query({{"old", std::to_string(old_size)}, {"new", std::to_string(new_size)}}))
      .get<merkle::ConsistencyProof>();
}

ledger::TimestampBracket HttpLedger::query_at(const std::string& issuer, int64_t t) {
  return client_.get("/at" + query({{"issuer", issuer}, {"t", std::to_string(t)}}))
      .get<ledger::TimestampBracket>();
}

void HttpLedger::add_cosignature(const ledger::SignedDigest& digest, const ledger::Cosignature& cosig) {
  client_.post("/cosign", {{"witness_id", cosig.witness_id},
                           {"signature", base64_encode(cosig.signature)},
                           {"digest", digest}});
}

ledger::CosignOutcome HttpWitness::cosign(const ledger::CosignRequest& request) {
  return client_.post("/cosign-request", request).get<ledger::CosignOutcome>();
}

ct::Sct HttpCtLog::submit_precert(ByteView tbs_der) {
  return client_.post("/submit", {{"tbs", base64_encode(tbs_der)}}).get<ct::Sct>();
}

ct::SignedTreeHead HttpCtLog::latest_tree_head() {
  return client_.get("/digest").get<ct::SignedTreeHead>();
}

merkle::InclusionProof HttpCtLog::prove_inclusion(uint64_t index, uint64_t tree_size) {
  return client_
      .get("/inclusion" + query({{"index", std::to_string(index)}, {"size", std::to_string(tree_size)}}))
      .get<merkle::InclusionProof>();
}

merkle::InclusionProof HttpCtLog::proof_by_hash(const Digest32& leaf_hash, uint64_t tree_size) {
  return client_
      .get("/proof-by-hash" + query({{"hash", hex_encode(leaf_hash)}, {"size", std::to_string(tree_size)}}))
      .get<merkle::InclusionProof>();
}

Bytes HttpCa::challenge(ByteView subject_public_key) const {
  return hex_decode(client_.post("/challenge", {{"public_key", base64_encode(subject_public_key)}})
                        .at("challenge")
                        .get<std::string>());
}

std::string HttpCa::issue(const ca::IssuanceRequest& request) const {
  json body = {{"token", request.token},
               {"public_key", base64_encode(request.subject_public_key)},
               {"pop", base64_encode(request.proof_of_possession)}};
  if (!request.challenge.empty()) body["challenge"] = hex_encode(request.challenge);
  auto c = make_client(client_.base_url());
  return checked_body(c.Post("/issue", body.dump(), "application/json"), client_.base_url() + "/issue");
}

std::string HttpCa::root_pem() const {
  return client_.get_text("/root");
}

VerifyingKey fetch_service_key(const std::string& url) {
  return VerifyingKey::from_pem(JsonClient(url).get_text("/key"));
}

}  // namespace poa::net
