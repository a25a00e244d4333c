#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "poa/ca/ca_service.hpp"
#include "poa/ct/ct_log.hpp"
#include "poa/idp/idp_sim.hpp"
#include "poa/ledger/types.hpp"

namespace poa::net {

/// Minimal JSON-over-HTTP client. Transport failures throw kNetwork; error
/// responses are rethrown with the server's error code (IssuanceError when
/// the server supplied an issuance reason).
class JsonClient {
 public:
  explicit JsonClient(std::string base_url);
  ~JsonClient();

  nlohmann::json get(const std::string& path) const;
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  std::string get_text(const std::string& path) const;
  const std::string& base_url() const { return base_url_; }

 private:
  std::string base_url_;
};

class HttpJwksSource final : public idp::JwksSource {
 public:
  explicit HttpJwksSource(std::string idp_url) : client_(std::move(idp_url)) {}
  jose::Jwks fetch_jwks(const std::string& issuer) override;

 private:
  JsonClient client_;
};

class HttpIdp {
 public:
  explicit HttpIdp(std::string url) : client_(std::move(url)) {}
  std::string token(const idp::TokenRequest& req) const;
  uint64_t rotate() const;

 private:
  JsonClient client_;
};

class HttpLedger final : public ledger::LedgerApi {
 public:
  explicit HttpLedger(std::string url) : client_(std::move(url)) {}
  ledger::AppendResult append(const std::string& issuer, const jose::Jwks& jwks) override;
  ledger::SignedDigest latest_digest() override;
  merkle::InclusionProof prove_inclusion(uint64_t index, uint64_t tree_size) override;
  merkle::ConsistencyProof prove_consistency(uint64_t old_size, uint64_t new_size) override;
  ledger::TimestampBracket query_at(const std::string& issuer, int64_t t) override;
  void add_cosignature(const ledger::SignedDigest& digest, const ledger::Cosignature& cosig) override;

 private:
  JsonClient client_;
};

class HttpWitness final : public ledger::WitnessApi {
 public:
  HttpWitness(std::string id, std::string url) : id_(std::move(id)), client_(std::move(url)) {}
  std::string id() const override { return id_; }
  ledger::CosignOutcome cosign(const ledger::CosignRequest& request) override;

 private:
  std::string id_;
  JsonClient client_;
};

class HttpCtLog final : public ct::CtLogApi {
 public:
  explicit HttpCtLog(std::string url) : client_(std::move(url)) {}
  ct::Sct submit_precert(ByteView tbs_der) override;
  ct::SignedTreeHead latest_tree_head() override;
  merkle::InclusionProof prove_inclusion(uint64_t index, uint64_t tree_size) override;
  merkle::InclusionProof proof_by_hash(const Digest32& leaf_hash, uint64_t tree_size) override;

 private:
  JsonClient client_;
};

class HttpCa {
 public:
  explicit HttpCa(std::string url) : client_(std::move(url)) {}
  Bytes challenge(ByteView subject_public_key) const;
  // Returns the PEM chain: leaf followed by the root.
  std::string issue(const ca::IssuanceRequest& request) const;
  std::string root_pem() const;

 private:
  JsonClient client_;
};

// GET /key on any service: the service's public verification key.
VerifyingKey fetch_service_key(const std::string& url);

}  // namespace poa::net
