#include "poa/idp/idp_sim.hpp"

#include <mutex>

#include <nlohmann/json.hpp>

#include "poa/common/bigint.hpp"
#include "poa/common/error.hpp"
#include "poa/common/random.hpp"
#include "poa/common/sha256.hpp"
#include "poa/jose/emsa.hpp"

namespace poa::idp {
namespace {

constexpr int kPrimalityReps = 30;

// Prime with exactly `bits` bits and the top two bits set, so the product of
// two such primes has exactly 2*bits bits.
mpz_class random_prime(unsigned bits, const mpz_class& e, RandomSource& rng) {
  const size_t nbytes = (bits + 7) / 8;
  const unsigned excess = static_cast<unsigned>(nbytes * 8 - bits);
  for (;;) {
    Bytes buf = rng.bytes(nbytes);
    buf[0] &= static_cast<uint8_t>(0xFF >> excess);
    mpz_class candidate = mpz_from_bytes(buf);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    // Deterministic search upward from the seed value; stays inside `bits`.
    while (bit_length(candidate) == bits) {
      if (mpz_probab_prime_p(candidate.get_mpz_t(), kPrimalityReps) > 0) {
        mpz_class g;
        mpz_class pm1 = candidate - 1;
        mpz_gcd(g.get_mpz_t(), pm1.get_mpz_t(), e.get_mpz_t());
        if (g == 1) return candidate;
      }
      candidate += 2;
    }
  }
}

}  // namespace

mpz_class RsaPrivateKey::sign_raw(const mpz_class& x) const {
  const mpz_class dp = d % (p - 1);
  const mpz_class dq = d % (q - 1);
  const mpz_class mp = powm(x % p, dp, p);
  const mpz_class mq = powm(x % q, dq, q);
  const mpz_class qinv = invert(q, p);
  mpz_class h = (qinv * (mp - mq)) % p;
  if (h < 0) h += p;
  return mq + h * q;
}

std::string key_id_for(const mpz_class& n, const mpz_class& e) {
  Bytes material;
  append_field(material, mpz_to_bytes(n));
  append_field(material, mpz_to_bytes(e));
  return hex_encode(sha256(material));
}

RsaPrivateKey generate_rsa(unsigned bits, unsigned long e, RandomSource& rng) {
  if (e < 3 || e % 2 == 0) fail(ErrorCode::kInvalidExponent, "RSA exponent must be odd and >= 3");
  if (bits < 64 || bits % 2 != 0) fail(ErrorCode::kInvalidArgument, "unsupported modulus size");
  const mpz_class ee(e);
  for (;;) {
    RsaPrivateKey key;
    key.p = random_prime(bits / 2, ee, rng);
    key.q = random_prime(bits / 2, ee, rng);
    if (key.p == key.q) continue;
    if (key.p < key.q) std::swap(key.p, key.q);
    const mpz_class n = key.p * key.q;
    if (bit_length(n) != bits) continue;
    mpz_class lambda;
    mpz_class pm1 = key.p - 1;
    mpz_class qm1 = key.q - 1;
    mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
    key.d = invert(ee, lambda);
    key.pub.modulus = n;
    key.pub.exponent = ee;
    key.pub.key_id = key_id_for(n, ee);
    return key;
  }
}

Bytes rs256_sign(const RsaPrivateKey& key, std::string_view signing_input) {
  const size_t k = key.pub.modulus_bytes();
  const mpz_class x = jose::emsa_encode(sha256(as_bytes(signing_input)), k);
  return mpz_to_bytes(key.sign_raw(x), k);
}

IdentityProvider::IdentityProvider(std::string issuer_url, unsigned bits, unsigned long e,
                                   std::shared_ptr<RandomSource> rng)
    : issuer_url_(std::move(issuer_url)), bits_(bits), e_(e), rng_(std::move(rng)) {
  signing_key_ = generate_rsa(bits_, e_, *rng_);
  active_.keys = {signing_key_.pub};
  jwks_doc_ = active_.to_json();
}

namespace {

IssuedToken sign_with(const RsaPrivateKey& key, const jose::JwtHeader& header,
                      const jose::OidcClaims& claims) {
  std::string signing_input = base64url_encode(as_bytes(jose::header_json(header))) + "." +
                              base64url_encode(as_bytes(jose::claims_json(claims)));
  Bytes sig = rs256_sign(key, signing_input);
  IssuedToken out;
  out.compact = signing_input + "." + base64url_encode(sig);
  out.token = jose::parse_compact(out.compact);
  return out;
}

}  // namespace

IssuedToken IdentityProvider::sign(const jose::JwtHeader& header,
                                   const jose::OidcClaims& claims) const {
  std::shared_lock lock(mu_);
  return sign_with(signing_key_, header, claims);
}

IssuedToken IdentityProvider::issue_token(const TokenRequest& req, int64_t now) const {
  if (req.lifetime <= 0) fail(ErrorCode::kInvalidArgument, "token lifetime must be positive");
  jose::OidcClaims claims;
  claims.iss = issuer_url_;
  claims.sub = req.sub;
  claims.aud = {req.aud};
  claims.iat = now;
  claims.exp = now + req.lifetime;
  claims.nonce = req.nonce;
  claims.email = req.email;
  jose::JwtHeader header;
  header.alg = "RS256";
  header.typ = "JWT";
  // kid lookup and signing happen under one lock so rotate cannot split them.
  std::shared_lock lock(mu_);
  header.kid = signing_key_.pub.key_id;
  return sign_with(signing_key_, header, claims);
}

void IdentityProvider::rotate(int64_t now) {
  RsaPrivateKey next = generate_rsa(bits_, e_, *rng_);
  std::unique_lock lock(mu_);
  retired_.push_back({active_, now});
  signing_key_ = std::move(next);
  active_.keys = {signing_key_.pub};
  jwks_doc_ = active_.to_json();
  ++rotation_counter_;
}

jose::Jwks IdentityProvider::active_keys() const {
  std::shared_lock lock(mu_);
  return active_;
}

std::string IdentityProvider::jwks_document() const {
  std::shared_lock lock(mu_);
  return jwks_doc_;
}

std::string IdentityProvider::discovery_document(const std::string& jwks_uri) const {
  return nlohmann::json{{"issuer", issuer_url_}, {"jwks_uri", jwks_uri}}.dump();
}

uint64_t IdentityProvider::rotation_counter() const {
  std::shared_lock lock(mu_);
  return rotation_counter_;
}

std::vector<RetiredKeys> IdentityProvider::retired_keys() const {
  std::shared_lock lock(mu_);
  return retired_;
}

gq::RsaPublicKey IdentityProvider::signing_public_key() const {
  std::shared_lock lock(mu_);
  return signing_key_.pub;
}

jose::Jwks IdentityProvider::fetch_jwks(const std::string& issuer) {
  if (issuer != issuer_url_) fail(ErrorCode::kNotFound, "unknown issuer " + issuer);
  return active_keys();
}

}  // namespace poa::idp
