#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "poa/jose/jose.hpp"

namespace poa {
class RandomSource;
}

namespace poa::idp {

struct RsaPrivateKey {
  mpz_class p;
  mpz_class q;
  mpz_class d;
  gq::RsaPublicKey pub;

  // Raw RSA: X^d mod n (CRT).
  mpz_class sign_raw(const mpz_class& x) const;
};

/// Generates an RSA key with an exactly `bits`-bit modulus and
/// gcd(e, p-1) = gcd(e, q-1) = 1. kid is the hex SHA-256 of (n, e).
RsaPrivateKey generate_rsa(unsigned bits, unsigned long e, RandomSource& rng);

std::string key_id_for(const mpz_class& n, const mpz_class& e);

/// Anything that can answer "what is the issuer's JWKS right now". The CA's
/// cache and every witness fetch through this.
class JwksSource {
 public:
  virtual ~JwksSource() = default;
  virtual jose::Jwks fetch_jwks(const std::string& issuer) = 0;
};

struct TokenRequest {
  std::string sub;
  std::string aud;
  int64_t lifetime = 600;
  std::optional<std::string> nonce;
  std::optional<std::string> email;
};

struct IssuedToken {
  std::string compact;
  jose::OidcToken token;
};

struct RetiredKeys {
  jose::Jwks keys;
  int64_t retired_at = 0;
};

/// Test double for an OIDC identity provider: one active RS256 signing key,
/// rotated on command.
class IdentityProvider final : public JwksSource {
 public:
  IdentityProvider(std::string issuer_url, unsigned bits, unsigned long e,
                   std::shared_ptr<RandomSource> rng);

  const std::string& issuer() const { return issuer_url_; }

  IssuedToken issue_token(const TokenRequest& req, int64_t now) const;

  // Retires the active key at `now` and generates a new one.
  void rotate(int64_t now);

  jose::Jwks active_keys() const;
  // Byte-stable between rotations.
  std::string jwks_document() const;
  std::string discovery_document(const std::string& jwks_uri) const;
  uint64_t rotation_counter() const;
  std::vector<RetiredKeys> retired_keys() const;
  gq::RsaPublicKey signing_public_key() const;

  jose::Jwks fetch_jwks(const std::string& issuer) override;

  // Signs arbitrary header/claims with the active key. Tests use this to
  // craft tokens the normal issuance path would not produce.
  IssuedToken sign(const jose::JwtHeader& header, const jose::OidcClaims& claims) const;

 private:
  std::string issuer_url_;
  unsigned bits_;
  unsigned long e_;
  std::shared_ptr<RandomSource> rng_;

  mutable std::shared_mutex mu_;
  RsaPrivateKey signing_key_;
  jose::Jwks active_;
  std::string jwks_doc_;
  std::vector<RetiredKeys> retired_;
  uint64_t rotation_counter_ = 0;
};

/// RS256 signature over `signing_input` with a raw private key.
Bytes rs256_sign(const RsaPrivateKey& key, std::string_view signing_input);

}  // namespace poa::idp
