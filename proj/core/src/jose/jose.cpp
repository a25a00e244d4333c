#include "poa/jose/jose.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "poa/common/bigint.hpp"
#include "poa/common/error.hpp"
#include "poa/common/sha256.hpp"
#include "poa/jose/emsa.hpp"

namespace poa::jose {
namespace {

using nlohmann::json;

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  for (;;) {
    size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

json decode_json_segment(std::string_view segment) {
  Bytes raw;
  try {
    raw = base64url_decode(segment);
  } catch (const Error&) {
    fail(ErrorCode::kMalformed, "segment is not base64url");
  }
  json j = json::parse(raw.begin(), raw.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(ErrorCode::kMalformed, "segment is not a JSON object");
  return j;
}

std::string required_string(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_string()) {
    fail(ErrorCode::kMalformed, std::string("missing string claim ") + name);
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) return std::nullopt;
  if (!it->is_string()) fail(ErrorCode::kMalformed, std::string("claim is not a string: ") + name);
  return it->get<std::string>();
}

int64_t required_time(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_number_integer()) {
    fail(ErrorCode::kMalformed, std::string("missing integer claim ") + name);
  }
  return it->get<int64_t>();
}

JwtHeader header_from(const json& j) {
  JwtHeader h;
  h.alg = required_string(j, "alg");
  h.kid = optional_string(j, "kid").value_or("");
  h.typ = optional_string(j, "typ");
  if (h.alg != "RS256") fail(ErrorCode::kUnsupportedAlgorithm, "unsupported JWS alg " + h.alg);
  return h;
}

OidcClaims claims_from(const json& j) {
  OidcClaims c;
  c.iss = required_string(j, "iss");
  c.sub = required_string(j, "sub");
  auto aud = j.find("aud");
  if (aud == j.end()) fail(ErrorCode::kMalformed, "missing aud claim");
  if (aud->is_string()) {
    c.aud.push_back(aud->get<std::string>());
  } else if (aud->is_array()) {
    for (const auto& a : *aud) {
      if (!a.is_string()) fail(ErrorCode::kMalformed, "aud entries must be strings");
      c.aud.push_back(a.get<std::string>());
    }
  } else {
    fail(ErrorCode::kMalformed, "aud must be a string or an array");
  }
  c.exp = required_time(j, "exp");
  c.iat = required_time(j, "iat");
  c.nonce = optional_string(j, "nonce");
  c.email = optional_string(j, "email");
  if (c.sub.empty()) fail(ErrorCode::kMalformed, "empty sub claim");
  if (c.aud.empty() || std::any_of(c.aud.begin(), c.aud.end(), [](auto& a) { return a.empty(); })) {
    fail(ErrorCode::kMalformed, "empty aud claim");
  }
  if (c.iat > c.exp) fail(ErrorCode::kMalformed, "iat after exp");
  return c;
}

SignedContent parse_two_segments(std::string_view header, std::string_view payload) {
  SignedContent out;
  out.header = header_from(decode_json_segment(header));
  out.claims = claims_from(decode_json_segment(payload));
  return out;
}

std::string b64_int(const mpz_class& v) {
  return base64url_encode(mpz_to_bytes(v));
}

}  // namespace

std::string OidcToken::compact() const {
  return signing_input + "." + base64url_encode(signature_bytes);
}

SignedContent parse_signing_input(std::string_view text) {
  auto parts = split(text, '.');
  if (parts.size() != 2) fail(ErrorCode::kMalformed, "expected header.payload");
  SignedContent out = parse_two_segments(parts[0], parts[1]);
  out.signing_input = std::string(text);
  return out;
}

OidcToken parse_compact(std::string_view token) {
  auto parts = split(token, '.');
  if (parts.size() == 5) fail(ErrorCode::kEncryptedDisallowed, "JWE tokens are not accepted");
  if (parts.size() != 3) fail(ErrorCode::kMalformed, "compact JWS must have three parts");
  SignedContent content = parse_two_segments(parts[0], parts[1]);
  OidcToken out;
  out.header = std::move(content.header);
  out.claims = std::move(content.claims);
  out.signing_input = std::string(token.substr(0, parts[0].size() + 1 + parts[1].size()));
  try {
    out.signature_bytes = base64url_decode(parts[2]);
  } catch (const Error&) {
    fail(ErrorCode::kMalformed, "signature is not base64url");
  }
  if (out.signature_bytes.empty()) fail(ErrorCode::kMalformed, "empty signature");
  out.signature = mpz_from_bytes(out.signature_bytes);
  return out;
}

std::string header_json(const JwtHeader& header) {
  json j;
  j["alg"] = header.alg;
  if (!header.kid.empty()) j["kid"] = header.kid;
  if (header.typ) j["typ"] = *header.typ;
  return j.dump();
}

std::string claims_json(const OidcClaims& claims) {
  json j;
  j["iss"] = claims.iss;
  j["sub"] = claims.sub;
  if (claims.aud.size() == 1) {
    j["aud"] = claims.aud.front();
  } else {
    j["aud"] = claims.aud;
  }
  j["exp"] = claims.exp;
  j["iat"] = claims.iat;
  if (claims.nonce) j["nonce"] = *claims.nonce;
  if (claims.email) j["email"] = *claims.email;
  return j.dump();
}

std::string_view to_string(ClaimVerdict v) {
  switch (v) {
    case ClaimVerdict::kOk: return "ok";
    case ClaimVerdict::kIssMismatch: return "iss-mismatch";
    case ClaimVerdict::kAudMismatch: return "aud-mismatch";
    case ClaimVerdict::kExpired: return "expired";
    case ClaimVerdict::kNotYetValid: return "not-yet-valid";
    case ClaimVerdict::kNonceMismatch: return "nonce-mismatch";
  }
  return "unknown";
}

ClaimVerdict validate_claims(const OidcClaims& claims, const ClaimPolicy& policy, int64_t now) {
  if (claims.iss != policy.expected_iss) return ClaimVerdict::kIssMismatch;
  if (std::find(claims.aud.begin(), claims.aud.end(), policy.expected_aud) == claims.aud.end()) {
    return ClaimVerdict::kAudMismatch;
  }
  if (now > claims.exp + policy.clock_skew) return ClaimVerdict::kExpired;
  if (now + policy.clock_skew < claims.iat) return ClaimVerdict::kNotYetValid;
  if (policy.expected_nonce && claims.nonce != policy.expected_nonce) {
    return ClaimVerdict::kNonceMismatch;
  }
  return ClaimVerdict::kOk;
}

const RsaPublicKey* Jwks::find(std::string_view kid) const {
  for (const auto& k : keys) {
    if (k.key_id == kid) return &k;
  }
  return nullptr;
}

std::string Jwks::to_json() const {
  json arr = json::array();
  for (const auto& k : keys) {
    arr.push_back({{"kty", "RSA"},
                   {"kid", k.key_id},
                   {"n", b64_int(k.modulus)},
                   {"e", b64_int(k.exponent)},
                   {"alg", "RS256"},
                   {"use", "sig"}});
  }
  return json{{"keys", arr}}.dump();
}

Jwks Jwks::from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("keys") || !j["keys"].is_array()) {
    fail(ErrorCode::kMalformed, "not a JWKS document");
  }
  Jwks out;
  for (const auto& k : j["keys"]) {
    if (!k.is_object() || k.value("kty", "") != "RSA") continue;
    RsaPublicKey pk;
    try {
      pk.key_id = k.at("kid").get<std::string>();
      pk.modulus = mpz_from_bytes(base64url_decode(k.at("n").get<std::string>()));
      pk.exponent = mpz_from_bytes(base64url_decode(k.at("e").get<std::string>()));
    } catch (const std::exception& e) {
      fail(ErrorCode::kMalformed, std::string("bad JWK: ") + e.what());
    }
    if (pk.exponent < 3) fail(ErrorCode::kMalformed, "JWK exponent below 3");
    if (out.find(pk.key_id) != nullptr) fail(ErrorCode::kMalformed, "duplicate kid in JWKS");
    out.keys.push_back(std::move(pk));
  }
  return out;
}

bool Jwks::same_keys(const Jwks& other) const {
  return keys == other.keys;
}

bool verify_rs256(const RsaPublicKey& pk, const OidcToken& token) {
  if (token.header.alg != "RS256") return false;
  const size_t k = pk.modulus_bytes();
  if (token.signature_bytes.size() != k || token.signature >= pk.modulus) return false;
  mpz_class expected;
  try {
    expected = emsa_encode(sha256(as_bytes(token.signing_input)), k);
  } catch (const Error&) {
    return false;
  }
  return powm(token.signature, pk.exponent, pk.modulus) == expected;
}

Rs256Verdict verify_rs256(const Jwks& jwks, const OidcToken& token) {
  if (!token.header.kid.empty()) {
    const RsaPublicKey* pk = jwks.find(token.header.kid);
    if (pk == nullptr) return Rs256Verdict::kKeyNotFound;
    return verify_rs256(*pk, token) ? Rs256Verdict::kAccept : Rs256Verdict::kReject;
  }
  if (jwks.keys.empty()) return Rs256Verdict::kKeyNotFound;
  const size_t limit = std::min(jwks.keys.size(), kMaxKidFallbackKeys);
  for (size_t i = 0; i < limit; ++i) {
    if (verify_rs256(jwks.keys[i], token)) return Rs256Verdict::kAccept;
  }
  return Rs256Verdict::kReject;
}

}  // namespace poa::jose
