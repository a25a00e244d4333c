#include "poa/verifier/topology.hpp"

#include "poa/common/error.hpp"

namespace poa::verifier {

Profile Profile::by_name(const std::string& name) {
  if (name == "toy") return toy();
  if (name == "default") return standard();
  fail(ErrorCode::kConfig, "unknown profile '" + name + "' (expected toy or default)");
}

Topology::Topology(TopologyOptions options)
    : clock(options.start_time),
      rng(std::make_shared<SeededRandom>(options.seed)),
      options_(std::move(options)) {
  const Clock now = clock.as_clock();
  idp = std::make_shared<idp::IdentityProvider>(options_.issuer, options_.profile.modulus_bits,
                                                options_.profile.exponent, rng);

  const SigningKey ledger_key = SigningKey::generate_ed25519(*rng);
  ledger = std::make_shared<ledger::JwkLedger>(ledger_key, now);
  ledger->set_jwks_source(idp);
  for (unsigned i = 0; i < options_.witnesses; ++i) {
    const std::string id = "witness-" + std::to_string(i + 1);
    SigningKey key = SigningKey::generate_ed25519(*rng);
    trust.witness_keys[id] = key.public_key();
    auto w = std::make_shared<ledger::Witness>(id, key, ledger_key.public_key(), idp, now);
    witnesses.push_back(w);
    ledger->add_witness(w);
  }

  const SigningKey ct_key = SigningKey::generate_ed25519(*rng);
  ct = std::make_shared<ct::CtLog>(ct_key, [this] { return clock.now() * 1000; });

  ca_key = SigningKey::generate_p256();
  root = ca::make_root(ca_key, options_.start_time - 86400, 10LL * 365 * 86400, options_.ca_id);

  trust.ca_root = root;
  trust.ledger_key = ledger_key.public_key();
  trust.quorum = options_.quorum;
  trust.ct_key = ct_key.public_key();
  trust.expected_issuer = options_.issuer;
  trust.expected_ca_audience = options_.ca_id;
  trust.lambda = options_.profile.lambda;
  trust.cert_lifetime = options_.cert_lifetime;
  trust.validate();

  ca::CaConfig config;
  config.ca_id = options_.ca_id;
  config.issuer_url = options_.issuer;
  config.cert_lifetime = options_.cert_lifetime;
  config.lambda = options_.profile.lambda;
  config.ledger_policy = trust.quorum_policy();
  ca = std::make_shared<ca::CertificateAuthority>(config, ca_key, root, idp, ledger, ct, rng, now);
  ca->poll_jwks();
}

Verifier Topology::verifier() const {
  return Verifier(trust, ledger, ct);
}

Issued Topology::request(const std::string& sub, int64_t token_lifetime) {
  return request(sub, options_.ca_id, token_lifetime);
}

Issued Topology::request(const std::string& sub, const std::string& aud, int64_t token_lifetime) {
  Issued out;
  out.requester_key = SigningKey::generate_p256();
  const Bytes spki = out.requester_key.public_key().der();
  const Bytes challenge = ca->new_challenge(spki);

  idp::TokenRequest req;
  req.sub = sub;
  req.aud = aud;
  req.lifetime = token_lifetime;
  req.nonce = hex_encode(challenge);
  out.token = idp->issue_token(req, clock.now());

  ca::IssuanceRequest issuance;
  issuance.token = out.token.compact;
  issuance.subject_public_key = spki;
  issuance.challenge = challenge;
  issuance.proof_of_possession = out.requester_key.sign(challenge);
  out.cert = ca->issue(issuance);
  return out;
}

void Topology::rotate() {
  idp->rotate(clock.now());
  ca->poll_jwks();
}

}  // namespace poa::verifier
