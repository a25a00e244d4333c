#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "poa/ca/ca_service.hpp"
#include "poa/common/clock.hpp"
#include "poa/common/random.hpp"
#include "poa/common/signing.hpp"
#include "poa/ct/ct_log.hpp"
#include "poa/idp/idp_sim.hpp"
#include "poa/ledger/jwk_ledger.hpp"
#include "poa/verifier/trust.hpp"
#include "poa/verifier/verifier.hpp"

namespace poa::verifier {

/// Key size, exponent and soundness level used together.
struct Profile {
  std::string name;
  unsigned modulus_bits = 2048;
  unsigned long exponent = 65537;
  unsigned lambda = 128;

  static Profile toy() { return {"toy", 512, 7, 16}; }
  static Profile standard() { return {"default", 2048, 65537, 128}; }
  // "toy" or "default"; throws kConfig otherwise.
  static Profile by_name(const std::string& name);
};

struct TopologyOptions {
  Profile profile = Profile::toy();
  uint64_t seed = 1;
  int64_t start_time = 1700000000;
  unsigned witnesses = 3;
  unsigned quorum = 2;
  std::string issuer = "https://idp.example";
  std::string ca_id = "poa-ca";
  int64_t cert_lifetime = ca::kDefaultCertLifetime;
};

/// Result of one requester run: the certificate plus what produced it.
struct Issued {
  ca::PoaCertificate cert;
  idp::IssuedToken token;
  SigningKey requester_key;
};

/// Every party wired together in one process on a manual clock.
class Topology {
 public:
  explicit Topology(TopologyOptions options);

  const TopologyOptions& options() const { return options_; }

  ManualClock clock;
  std::shared_ptr<SeededRandom> rng;
  std::shared_ptr<idp::IdentityProvider> idp;
  std::shared_ptr<ledger::JwkLedger> ledger;
  std::vector<std::shared_ptr<ledger::Witness>> witnesses;
  std::shared_ptr<ct::CtLog> ct;
  SigningKey ca_key;
  ca::Certificate root;
  std::shared_ptr<ca::CertificateAuthority> ca;
  TrustRoots trust;

  Verifier verifier() const;

  // Generates a requester key, obtains a challenge, a token whose nonce is
  // the challenge, and a certificate.
  Issued request(const std::string& sub, int64_t token_lifetime = 600);
  Issued request(const std::string& sub, const std::string& aud, int64_t token_lifetime);

  // Rotates the IdP key and lets the CA record the new key set.
  void rotate();

 private:
  TopologyOptions options_;
};

}  // namespace poa::verifier
