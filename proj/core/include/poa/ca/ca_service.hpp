#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "poa/ca/x509.hpp"
#include "poa/common/bytes.hpp"
#include "poa/common/clock.hpp"
#include "poa/common/error.hpp"
#include "poa/common/signing.hpp"
#include "poa/ct/ct_log.hpp"
#include "poa/idp/idp_sim.hpp"
#include "poa/jose/jose.hpp"
#include "poa/ledger/types.hpp"

namespace poa {
class RandomSource;
}

namespace poa::ca {

inline constexpr int64_t kDefaultCertLifetime = 600;

struct CaConfig {
  std::string ca_id = "poa-ca";  // the audience tokens must name
  std::string issuer_url;        // the single supported IdP
  int64_t cert_lifetime = kDefaultCertLifetime;
  unsigned lambda = 128;
  int64_t clock_skew = jose::kDefaultClockSkew;
  bool require_nonce = true;
  int64_t challenge_ttl = 300;
  PoaOids oids;
  // Digests returned by the ledger must carry this quorum before the CA
  // relies on them.
  ledger::QuorumPolicy ledger_policy;
};

struct IssuanceRequest {
  std::string token;        // compact JWS
  Bytes subject_public_key; // SubjectPublicKeyInfo DER
  Bytes challenge;
  Bytes proof_of_possession;  // requester's signature over the challenge
};

struct PoaCertificate {
  Bytes der;
  ct::Sct sct;

  std::string pem() const { return der_to_pem(der); }
};

/// Issuance failure. `reason()` is the short machine code, e.g.
/// "invalid-token(aud-mismatch)".
class IssuanceError : public Error {
 public:
  IssuanceError(ErrorCode code, std::string reason, const std::string& detail)
      : Error(code, reason + (detail.empty() ? "" : ": " + detail)), reason_(std::move(reason)) {}

  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

/// Deterministic mapping from validated claims to certificate fields: a sub
/// containing '@' becomes an rfc822Name SAN, anything else a URI SAN;
/// notBefore = iat, notAfter = iat + lifetime. Empty sub is rejected.
SubjectFields claim_map(const jose::OidcClaims& claims, int64_t lifetime);

struct PollResult {
  bool changed = false;
  bool degraded = false;  // fetch failed; stale cache kept
  jose::Jwks jwks;
  Digest32 content_hash{};
};

/// The certificate authority. Issuance requests may run concurrently; pushes
/// to the ledger are serialized.
class CertificateAuthority {
 public:
  CertificateAuthority(CaConfig config, SigningKey ca_key, Certificate root,
                       std::shared_ptr<idp::JwksSource> idp, std::shared_ptr<ledger::LedgerApi> ledger,
                       std::shared_ptr<ct::CtLogApi> ct, std::shared_ptr<RandomSource> rng,
                       Clock clock);

  const CaConfig& config() const { return config_; }
  const Certificate& root() const { return root_; }

  // Fresh single-use challenge bound to the given public key. The requester
  // signs it and asks the IdP for a token whose nonce is its hex encoding.
  Bytes new_challenge(ByteView subject_public_key);
  Bytes new_challenge(ByteView subject_public_key, int64_t now);

  PoaCertificate issue(const IssuanceRequest& request);
  PoaCertificate issue(const IssuanceRequest& request, int64_t now);

  // Fetches the issuer's JWKS; when the content differs from what was last
  // pushed, appends it to the ledger and requires a quorum digest.
  PollResult poll_jwks();

  // Baseline certificate with identical subject fields and SCT but without
  // the signing-input and proof extensions, for size comparison.
  PoaCertificate issue_baseline(const IssuanceRequest& request, int64_t now);

  std::optional<jose::Jwks> cached_jwks() const;

 private:
  struct Validated {
    jose::OidcToken token;
    jose::Jwks jwks;
    const gq::RsaPublicKey* key = nullptr;
  };

  Validated validate(const IssuanceRequest& request, int64_t now);
  PoaCertificate build(const IssuanceRequest& request, const Validated& v, bool with_proof);
  void push_locked(const jose::Jwks& jwks, const Digest32& hash);

  CaConfig config_;
  SigningKey ca_key_;
  Certificate root_;
  std::shared_ptr<idp::JwksSource> idp_;
  std::shared_ptr<ledger::LedgerApi> ledger_;
  std::shared_ptr<ct::CtLogApi> ct_;
  std::shared_ptr<RandomSource> rng_;
  Clock clock_;

  mutable std::shared_mutex cache_mu_;
  std::optional<jose::Jwks> cache_;
  Digest32 cache_hash_{};

  std::mutex push_mu_;
  std::optional<Digest32> pushed_hash_;

  std::mutex challenge_mu_;
  struct Challenge {
    Bytes subject_public_key;
    int64_t expires = 0;
  };
  std::map<std::string, Challenge> challenges_;
};

}  // namespace poa::ca
