#include "poa/verifier/trust.hpp"

#include <nlohmann/json.hpp>

#include "poa/common/error.hpp"

namespace poa::verifier {

using nlohmann::json;

void TrustRoots::validate() const {
  if (!ca_root.valid()) fail(ErrorCode::kConfig, "trust roots: missing CA root");
  if (!ledger_key.valid()) fail(ErrorCode::kConfig, "trust roots: missing ledger key");
  if (!ct_key.valid()) fail(ErrorCode::kConfig, "trust roots: missing CT log key");
  if (quorum > witness_keys.size()) {
    fail(ErrorCode::kConfig, "trust roots: quorum exceeds the number of witnesses");
  }
  for (const auto& [id, key] : witness_keys) {
    if (!key.valid()) fail(ErrorCode::kConfig, "trust roots: bad key for witness " + id);
  }
  if (expected_issuer.empty()) fail(ErrorCode::kConfig, "trust roots: missing expected issuer");
  if (lambda == 0) fail(ErrorCode::kConfig, "trust roots: lambda must be positive");
}

ledger::QuorumPolicy TrustRoots::quorum_policy() const {
  return ledger::QuorumPolicy{ledger_key, witness_keys, quorum};
}

std::string TrustRoots::to_json() const {
  json witnesses = json::object();
  for (const auto& [id, key] : witness_keys) witnesses[id] = key.pem();
  json j = {
      {"ca_root", ca_root.pem()},
      {"ledger_key", ledger_key.pem()},
      {"witness_keys", witnesses},
      {"quorum", quorum},
      {"ct_key", ct_key.pem()},
      {"expected_issuer", expected_issuer},
      {"expected_ca_audience", expected_ca_audience},
      {"lambda", lambda},
      {"cert_lifetime", cert_lifetime},
      {"clock_skew", clock_skew},
      {"oids",
       {{"signing_input", oids.signing_input},
        {"proof", oids.proof},
        {"issuer", oids.issuer},
        {"sct", oids.sct}}},
  };
  return j.dump(2) + "\n";
}

TrustRoots TrustRoots::from_json(std::string_view text) {
  TrustRoots t;
  try {
    const json j = json::parse(text);
    t.ca_root = ca::Certificate::from_pem(j.at("ca_root").get<std::string>());
    t.ledger_key = VerifyingKey::from_pem(j.at("ledger_key").get<std::string>());
    for (const auto& [id, pem] : j.at("witness_keys").items()) {
      t.witness_keys[id] = VerifyingKey::from_pem(pem.get<std::string>());
    }
    t.quorum = j.at("quorum").get<unsigned>();
    t.ct_key = VerifyingKey::from_pem(j.at("ct_key").get<std::string>());
    t.expected_issuer = j.at("expected_issuer").get<std::string>();
    t.expected_ca_audience = j.value("expected_ca_audience", t.expected_ca_audience);
    t.lambda = j.value("lambda", t.lambda);
    t.cert_lifetime = j.value("cert_lifetime", t.cert_lifetime);
    t.clock_skew = j.value("clock_skew", t.clock_skew);
    if (j.contains("oids")) {
      const json& o = j["oids"];
      t.oids.signing_input = o.value("signing_input", t.oids.signing_input);
      t.oids.proof = o.value("proof", t.oids.proof);
      t.oids.issuer = o.value("issuer", t.oids.issuer);
      t.oids.sct = o.value("sct", t.oids.sct);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("trust roots: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, std::string("trust roots: ") + e.what());
  }
  t.validate();
  return t;
}

}  // namespace poa::verifier
