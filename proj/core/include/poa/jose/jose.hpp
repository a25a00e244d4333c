#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "poa/common/bytes.hpp"
#include "poa/gq/gq_pok.hpp"

namespace poa::jose {

using gq::RsaPublicKey;

inline constexpr int64_t kDefaultClockSkew = 60;
inline constexpr size_t kMaxKidFallbackKeys = 16;

struct JwtHeader {
  std::string alg;
  std::string kid;  // empty when the token carries no kid
  std::optional<std::string> typ;
};

struct OidcClaims {
  std::string iss;
  std::string sub;
  std::vector<std::string> aud;
  int64_t exp = 0;
  int64_t iat = 0;
  std::optional<std::string> nonce;
  std::optional<std::string> email;

  bool operator==(const OidcClaims&) const = default;
};

/// Header and claims of a compact JWS without its signature. This is what the
/// CA embeds in certificates.
struct SignedContent {
  JwtHeader header;
  OidcClaims claims;
  std::string signing_input;  // base64url(header) "." base64url(payload), verbatim
};

struct OidcToken {
  JwtHeader header;
  OidcClaims claims;
  std::string signing_input;
  Bytes signature_bytes;
  mpz_class signature;

  std::string compact() const;
};

/// Parses "header.payload" (exactly one '.'). Used for certificate
/// extension contents; a third segment is malformed.
SignedContent parse_signing_input(std::string_view text);

/// Parses a compact JWS. Errors: kMalformed, kEncryptedDisallowed (five-part
/// JWE), kUnsupportedAlgorithm (alg != RS256).
OidcToken parse_compact(std::string_view token);

// Serializes a header / claim set the way idp_sim writes them.
std::string header_json(const JwtHeader& header);
std::string claims_json(const OidcClaims& claims);

enum class ClaimVerdict {
  kOk,
  kIssMismatch,
  kAudMismatch,
  kExpired,
  kNotYetValid,
  kNonceMismatch,
};

std::string_view to_string(ClaimVerdict v);

struct ClaimPolicy {
  std::string expected_iss;
  std::string expected_aud;
  std::optional<std::string> expected_nonce;  // absent: nonce not checked
  int64_t clock_skew = kDefaultClockSkew;
};

ClaimVerdict validate_claims(const OidcClaims& claims, const ClaimPolicy& policy, int64_t now);

struct Jwks {
  std::vector<RsaPublicKey> keys;
  int64_t fetched_at = 0;

  const RsaPublicKey* find(std::string_view kid) const;

  // {"keys":[{"alg":"RS256","e":..,"kid":..,"kty":"RSA","n":..,"use":"sig"}]}
  // with object keys sorted; byte-stable for a given key list.
  std::string to_json() const;
  static Jwks from_json(std::string_view text);

  // Equality of key material and order, ignoring fetched_at.
  bool same_keys(const Jwks& other) const;
};

bool verify_rs256(const RsaPublicKey& pk, const OidcToken& token);

enum class Rs256Verdict { kAccept, kReject, kKeyNotFound };

/// Selects the key by kid; with no kid, tries up to kMaxKidFallbackKeys keys.
Rs256Verdict verify_rs256(const Jwks& jwks, const OidcToken& token);

}  // namespace poa::jose
