#include "poa/ca/ca_service.hpp"

#include <climits>
#include <mutex>

#include "poa/common/random.hpp"
#include "poa/common/sha256.hpp"
#include "poa/gq/gq_pok.hpp"

namespace poa::ca {
namespace {

[[noreturn]] void reject(ErrorCode code, const std::string& reason, const std::string& detail = {}) {
  throw IssuanceError(code, reason, detail);
}

Digest32 jwks_hash(const jose::Jwks& jwks) {
  return sha256(as_bytes(jwks.to_json()));
}

}  // namespace

SubjectFields claim_map(const jose::OidcClaims& claims, int64_t lifetime) {
  if (claims.sub.empty()) fail(ErrorCode::kInvalidArgument, "empty sub cannot be mapped");
  SubjectFields f;
  f.san_type = claims.sub.find('@') != std::string::npos ? SanType::kEmail : SanType::kUri;
  f.san_value = claims.sub;
  f.issuer = claims.iss;
  f.not_before = claims.iat;
  f.not_after = claims.iat + lifetime;
  return f;
}

CertificateAuthority::CertificateAuthority(CaConfig config, SigningKey ca_key, Certificate root,
                                           std::shared_ptr<idp::JwksSource> idp,
                                           std::shared_ptr<ledger::LedgerApi> ledger,
                                           std::shared_ptr<ct::CtLogApi> ct,
                                           std::shared_ptr<RandomSource> rng, Clock clock)
    : config_(std::move(config)),
      ca_key_(std::move(ca_key)),
      root_(std::move(root)),
      idp_(std::move(idp)),
      ledger_(std::move(ledger)),
      ct_(std::move(ct)),
      rng_(std::move(rng)),
      clock_(std::move(clock)) {}

Bytes CertificateAuthority::new_challenge(ByteView subject_public_key) {
  return new_challenge(subject_public_key, clock_());
}

Bytes CertificateAuthority::new_challenge(ByteView subject_public_key, int64_t now) {
  VerifyingKey::from_der(subject_public_key);  // reject junk early
  Bytes nonce = rng_->bytes(32);
  std::lock_guard lock(challenge_mu_);
  for (auto it = challenges_.begin(); it != challenges_.end();) {
    it = it->second.expires < now ? challenges_.erase(it) : std::next(it);
  }
  challenges_[hex_encode(nonce)] =
      Challenge{Bytes(subject_public_key.begin(), subject_public_key.end()), now + config_.challenge_ttl};
  return nonce;
}

std::optional<jose::Jwks> CertificateAuthority::cached_jwks() const {
  std::shared_lock lock(cache_mu_);
  return cache_;
}

PollResult CertificateAuthority::poll_jwks() {
  PollResult out;
  jose::Jwks fresh;
  try {
    fresh = idp_->fetch_jwks(config_.issuer_url);
  } catch (const std::exception&) {
    std::shared_lock lock(cache_mu_);
    out.degraded = true;
    if (cache_) {
      out.jwks = *cache_;
      out.content_hash = cache_hash_;
    }
    return out;
  }
  const Digest32 hash = jwks_hash(fresh);
  {
    std::unique_lock lock(cache_mu_);
    cache_ = fresh;
    cache_hash_ = hash;
  }
  out.jwks = fresh;
  out.content_hash = hash;
  std::lock_guard push_lock(push_mu_);
  if (pushed_hash_ != hash) {
    push_locked(fresh, hash);
    out.changed = true;
  }
  return out;
}

void CertificateAuthority::push_locked(const jose::Jwks& jwks, const Digest32& hash) {
  ledger::AppendResult result;
  try {
    result = ledger_->append(config_.issuer_url, jwks);
  } catch (const std::exception& e) {
    reject(ErrorCode::kLedgerUnavailable, "ledger-unavailable", e.what());
  }
  if (!result.entry.jwks.same_keys(jwks) || result.entry.issuer != config_.issuer_url ||
      result.entry.compute_leaf_hash() != result.entry.leaf_hash ||
      result.entry.index >= result.digest.tree_size) {
    reject(ErrorCode::kLedgerUnavailable, "ledger-unavailable", "append response does not match");
  }
  if (config_.ledger_policy.log_key.valid()) {
    if (!ledger::client_check_quorum(result.digest, config_.ledger_policy).accepted) {
      reject(ErrorCode::kLedgerUnavailable, "ledger-unavailable", "digest lacks witness quorum");
    }
    merkle::InclusionProof proof;
    try {
      proof = ledger_->prove_inclusion(result.entry.index, result.digest.tree_size);
    } catch (const std::exception& e) {
      reject(ErrorCode::kLedgerUnavailable, "ledger-unavailable", e.what());
    }
    if (!merkle::verify_inclusion(result.entry.leaf_hash, proof, result.digest.root)) {
      reject(ErrorCode::kLedgerUnavailable, "ledger-unavailable", "entry not included in digest");
    }
  }
  pushed_hash_ = hash;
}

CertificateAuthority::Validated CertificateAuthority::validate(const IssuanceRequest& request,
                                                               int64_t now) {
  Validated v;
  try {
    v.token = jose::parse_compact(request.token);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kEncryptedDisallowed: reject(ErrorCode::kInvalidToken, "invalid-token(encrypted)", e.what());
      case ErrorCode::kUnsupportedAlgorithm: reject(ErrorCode::kInvalidToken, "invalid-token(unsupported-algorithm)", e.what());
      default: reject(ErrorCode::kInvalidToken, "invalid-token(malformed)", e.what());
    }
  }

  // Proof of possession of the subject key over a challenge we issued. An
  // absent challenge selects the newest one issued for the key.
  Bytes challenge = request.challenge;
  {
    std::lock_guard lock(challenge_mu_);
    if (challenge.empty()) {
      int64_t newest = INT64_MIN;
      for (const auto& [nonce, ch] : challenges_) {
        if (ch.subject_public_key == request.subject_public_key && ch.expires > newest) {
          newest = ch.expires;
          challenge = hex_decode(nonce);
        }
      }
    }
    auto it = challenges_.find(hex_encode(challenge));
    if (it == challenges_.end()) reject(ErrorCode::kInvalidPop, "invalid-pop", "unknown challenge");
    const Challenge ch = it->second;
    challenges_.erase(it);
    if (ch.expires < now) reject(ErrorCode::kInvalidPop, "invalid-pop", "challenge expired");
    if (ch.subject_public_key != request.subject_public_key) {
      reject(ErrorCode::kInvalidPop, "invalid-pop", "challenge bound to another key");
    }
  }
  try {
    if (!VerifyingKey::from_der(request.subject_public_key)
             .verify(challenge, request.proof_of_possession)) {
      reject(ErrorCode::kInvalidPop, "invalid-pop", "signature over challenge does not verify");
    }
  } catch (const IssuanceError&) {
    throw;
  } catch (const std::exception& e) {
    reject(ErrorCode::kInvalidPop, "invalid-pop", e.what());
  }

  jose::ClaimPolicy policy;
  policy.expected_iss = config_.issuer_url;
  policy.expected_aud = config_.ca_id;
  policy.clock_skew = config_.clock_skew;
  if (config_.require_nonce) policy.expected_nonce = hex_encode(challenge);
  const jose::ClaimVerdict cv = jose::validate_claims(v.token.claims, policy, now);
  if (cv != jose::ClaimVerdict::kOk) {
    reject(ErrorCode::kInvalidToken, "invalid-token(" + std::string(jose::to_string(cv)) + ")");
  }

  // Fresh key set for step 1; the ledger push happens after the token checks.
  jose::Jwks jwks;
  try {
    jwks = idp_->fetch_jwks(config_.issuer_url);
    std::unique_lock lock(cache_mu_);
    cache_ = jwks;
    cache_hash_ = jwks_hash(jwks);
  } catch (const std::exception&) {
    std::shared_lock lock(cache_mu_);
    if (!cache_) reject(ErrorCode::kInvalidToken, "invalid-token(jwks-unavailable)");
    jwks = *cache_;
  }
  switch (jose::verify_rs256(jwks, v.token)) {
    case jose::Rs256Verdict::kAccept: break;
    case jose::Rs256Verdict::kKeyNotFound: reject(ErrorCode::kInvalidToken, "invalid-token(key-not-found)");
    case jose::Rs256Verdict::kReject: reject(ErrorCode::kInvalidToken, "invalid-token(bad-signature)");
  }
  v.jwks = jwks;
  return v;
}

PoaCertificate CertificateAuthority::issue(const IssuanceRequest& request) {
  return issue(request, clock_());
}

PoaCertificate CertificateAuthority::issue(const IssuanceRequest& request, int64_t now) {
  Validated v = validate(request, now);
  {
    std::lock_guard push_lock(push_mu_);
    const Digest32 hash = jwks_hash(v.jwks);
    if (pushed_hash_ != hash) push_locked(v.jwks, hash);
  }
  return build(request, v, true);
}

PoaCertificate CertificateAuthority::issue_baseline(const IssuanceRequest& request, int64_t now) {
  Validated v = validate(request, now);
  return build(request, v, false);
}

PoaCertificate CertificateAuthority::build(const IssuanceRequest& request, const Validated& v,
                                           bool with_proof) {
  LeafContents contents;
  try {
    contents.fields = claim_map(v.token.claims, config_.cert_lifetime);
  } catch (const Error& e) {
    reject(ErrorCode::kInvalidToken, "invalid-token(unmappable-sub)", e.what());
  }
  contents.subject_spki = request.subject_public_key;
  contents.serial = rng_->bytes(16);
  contents.serial[0] = static_cast<uint8_t>((contents.serial[0] & 0x3f) | 0x40);
  contents.oids = config_.oids;

  if (with_proof) {
    const gq::RsaPublicKey* key = v.jwks.find(v.token.header.kid);
    if (key == nullptr) {
      for (const auto& k : v.jwks.keys) {
        if (jose::verify_rs256(k, v.token)) {
          key = &k;
          break;
        }
      }
    }
    if (key == nullptr) reject(ErrorCode::kInvalidToken, "invalid-token(key-not-found)");
    contents.signing_input = v.token.signing_input;
    try {
      contents.proof = gq::prove(*key, as_bytes(v.token.signing_input), v.token.signature,
                                 config_.lambda, *rng_)
                           .encode();
    } catch (const Error& e) {
      reject(ErrorCode::kProofFailure, "proof-failure", e.what());
    }
  }

  Certificate precert = build_precertificate(contents, root_, ca_key_);
  const Bytes tbs = tbs_bytes(precert);
  ct::Sct sct;
  try {
    sct = ct_->submit_precert(tbs);
  } catch (const std::exception& e) {
    reject(ErrorCode::kCtUnavailable, "ct-unavailable", e.what());
  }
  const int64_t sct_seconds = sct.timestamp_ms / 1000;
  if (sct_seconds < contents.fields.not_before || sct_seconds > contents.fields.not_after) {
    reject(ErrorCode::kCtUnavailable, "ct-unavailable", "SCT timestamp outside certificate validity");
  }
  Certificate cert = attach_sct(precert, sct.encode(), config_.oids.sct, ca_key_);

  PoaCertificate out{cert.der(), sct};
  if (contains_subsequence(out.der, v.token.signature_bytes) ||
      contains_subsequence(out.der, as_bytes(base64url_encode(v.token.signature_bytes)))) {
    reject(ErrorCode::kProofFailure, "proof-failure", "token signature would be embedded");
  }
  return out;
}

}  // namespace poa::ca
