#include "poa/gq/gq_pok.hpp"

#include "poa/common/bigint.hpp"
#include "poa/common/error.hpp"
#include "poa/common/random.hpp"
#include "poa/common/sha256.hpp"
#include "poa/jose/emsa.hpp"

namespace poa::gq {
namespace {

constexpr size_t kMaxChallengeBits = 63;

bool in_unit_range(const mpz_class& v, const mpz_class& n) {
  if (v < 1 || v >= n) return false;
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
  return g == 1;
}

// Reads `bits` bits MSB-first starting at bit offset `pos`.
uint64_t read_bits(ByteView stream, size_t pos, unsigned bits) {
  uint64_t v = 0;
  for (unsigned i = 0; i < bits; ++i) {
    size_t bit = pos + i;
    v = (v << 1) | ((stream[bit / 8] >> (7 - bit % 8)) & 1u);
  }
  return v;
}

}  // namespace

size_t RsaPublicKey::modulus_bytes() const {
  return byte_length(modulus);
}

void RsaPublicKey::validate(bool toy) const {
  if (exponent < 3 || mpz_even_p(exponent.get_mpz_t())) {
    fail(ErrorCode::kInvalidExponent, "RSA exponent must be odd and at least 3");
  }
  if (bit_length(exponent) > kMaxChallengeBits + 1) {
    fail(ErrorCode::kInvalidExponent, "RSA exponent wider than 64 bits is not supported");
  }
  if (modulus < 3 || mpz_even_p(modulus.get_mpz_t())) {
    fail(ErrorCode::kInvalidArgument, "RSA modulus must be odd");
  }
  if (!toy && bit_length(modulus) < 512) {
    fail(ErrorCode::kInvalidArgument, "RSA modulus shorter than 512 bits");
  }
}

RoundParams round_count(unsigned lambda, const mpz_class& e) {
  if (e < 3) fail(ErrorCode::kInvalidExponent, "RSA exponent must be at least 3");
  if (lambda < 1) fail(ErrorCode::kInvalidArgument, "lambda must be positive");
  const size_t b = bit_length(e) - 1;  // floor(log2 e)
  if (b > kMaxChallengeBits) fail(ErrorCode::kInvalidExponent, "RSA exponent too large");
  RoundParams p;
  p.challenge_bits = static_cast<unsigned>(b);
  p.rounds = static_cast<unsigned>((lambda + b - 1) / b);
  return p;
}

mpz_class padded_message(const RsaPublicKey& pk, ByteView signing_input) {
  return jose::emsa_encode(sha256(signing_input), pk.modulus_bytes());
}

size_t GqProof::encoded_size() const {
  return 5 + 2 * rounds * modulus_len + 1 + key_id.size();
}

Bytes GqProof::encode() const {
  if (rounds == 0 || rounds > 255 || challenge_bits == 0 || challenge_bits > 255) {
    fail(ErrorCode::kInvalidArgument, "round parameters do not fit the wire format");
  }
  if (modulus_len == 0 || modulus_len > 0xFFFF) {
    fail(ErrorCode::kInvalidArgument, "modulus length does not fit the wire format");
  }
  if (commitments.size() != rounds || responses.size() != rounds) {
    fail(ErrorCode::kInvalidArgument, "commitment/response count differs from rounds");
  }
  if (key_id.size() > 255) fail(ErrorCode::kInvalidArgument, "key id longer than 255 bytes");
  Bytes out;
  out.reserve(encoded_size());
  out.push_back(kWireVersion);
  out.push_back(static_cast<uint8_t>(rounds));
  out.push_back(static_cast<uint8_t>(challenge_bits));
  append_u16_be(out, static_cast<uint16_t>(modulus_len));
  for (const auto& t : commitments) append(out, mpz_to_bytes(t, modulus_len));
  for (const auto& z : responses) append(out, mpz_to_bytes(z, modulus_len));
  out.push_back(static_cast<uint8_t>(key_id.size()));
  append(out, as_bytes(key_id));
  return out;
}

GqProof GqProof::decode(ByteView wire) {
  if (wire.size() < 6) fail(ErrorCode::kDecode, "proof shorter than its header");
  if (wire[0] != kWireVersion) fail(ErrorCode::kDecode, "unknown proof version");
  GqProof p;
  p.rounds = wire[1];
  p.challenge_bits = wire[2];
  p.modulus_len = static_cast<size_t>(wire[3]) << 8 | wire[4];
  if (p.rounds == 0 || p.challenge_bits == 0 || p.modulus_len == 0) {
    fail(ErrorCode::kDecode, "zero-valued proof header field");
  }
  const size_t body = 2 * p.rounds * p.modulus_len;
  if (wire.size() < 5 + body + 1) fail(ErrorCode::kDecode, "truncated proof");
  const size_t kid_len = wire[5 + body];
  if (wire.size() != 5 + body + 1 + kid_len) fail(ErrorCode::kDecode, "proof length mismatch");
  size_t pos = 5;
  for (unsigned i = 0; i < p.rounds; ++i, pos += p.modulus_len) {
    p.commitments.push_back(mpz_from_bytes(wire.subspan(pos, p.modulus_len)));
  }
  for (unsigned i = 0; i < p.rounds; ++i, pos += p.modulus_len) {
    p.responses.push_back(mpz_from_bytes(wire.subspan(pos, p.modulus_len)));
  }
  ++pos;
  p.key_id = to_string(wire.subspan(pos, kid_len));
  return p;
}

Challenges fiat_shamir(const RsaPublicKey& pk, const mpz_class& x,
                       std::span<const mpz_class> commitments, ByteView context,
                       unsigned challenge_bits) {
  if (commitments.empty()) fail(ErrorCode::kInvalidArgument, "no commitments");
  if (challenge_bits == 0 || challenge_bits > kMaxChallengeBits) {
    fail(ErrorCode::kInvalidArgument, "challenge width out of range");
  }
  const size_t width = pk.modulus_bytes();
  Bytes transcript;
  append_field(transcript, as_bytes(kDomainTag));
  append_field(transcript, mpz_to_bytes(pk.modulus));
  append_field(transcript, mpz_to_bytes(pk.exponent));
  append_field(transcript, mpz_to_bytes(x, width));
  append_u32_be(transcript, static_cast<uint32_t>(commitments.size()));
  for (const auto& t : commitments) append(transcript, mpz_to_bytes(t, width));
  append_field(transcript, context);
  const Digest32 seed = sha256(transcript);

  const size_t total_bits = commitments.size() * challenge_bits;
  Bytes stream(seed.begin(), seed.end());
  if (total_bits > 256) {
    stream.clear();
    for (uint32_t counter = 0; stream.size() * 8 < total_bits; ++counter) {
      Bytes ctr;
      append_u32_be(ctr, counter);
      append(stream, sha256({seed, ctr}));
    }
  }
  Challenges out;
  out.reserve(commitments.size());
  for (size_t i = 0; i < commitments.size(); ++i) {
    out.push_back(read_bits(stream, i * challenge_bits, challenge_bits));
  }
  return out;
}

mpz_class commit_round(const RsaPublicKey& pk, const mpz_class& r) {
  return powm(r, pk.exponent, pk.modulus);
}

mpz_class respond_round(const RsaPublicKey& pk, const mpz_class& r, const mpz_class& sigma,
                        uint64_t challenge) {
  mpz_class z = powm(sigma, static_cast<unsigned long>(challenge), pk.modulus);
  z = (z * r) % pk.modulus;
  return z;
}

bool check_round(const RsaPublicKey& pk, const mpz_class& x, const mpz_class& commitment,
                 const mpz_class& response, uint64_t challenge) {
  const mpz_class lhs = powm(response, pk.exponent, pk.modulus);
  mpz_class rhs = powm(x, static_cast<unsigned long>(challenge), pk.modulus);
  rhs = (rhs * commitment) % pk.modulus;
  return lhs == rhs;
}

GqProof prove_statement(const RsaPublicKey& pk, const mpz_class& x, const mpz_class& sigma,
                        unsigned lambda, RandomSource& rng) {
  const RoundParams params = round_count(lambda, pk.exponent);
  const mpz_class s = sigma % pk.modulus;
  if (powm(s, pk.exponent, pk.modulus) != x % pk.modulus) {
    fail(ErrorCode::kSignatureMismatch, "signature does not verify against the statement");
  }
  std::vector<mpz_class> randomness;
  GqProof proof;
  proof.rounds = params.rounds;
  proof.challenge_bits = params.challenge_bits;
  proof.modulus_len = pk.modulus_bytes();
  proof.key_id = pk.key_id;
  for (unsigned i = 0; i < params.rounds; ++i) {
    randomness.push_back(rng.uniform_unit(pk.modulus));
    proof.commitments.push_back(commit_round(pk, randomness.back()));
  }
  const Challenges c =
      fiat_shamir(pk, x, proof.commitments, as_bytes(pk.key_id), params.challenge_bits);
  for (unsigned i = 0; i < params.rounds; ++i) {
    proof.responses.push_back(respond_round(pk, randomness[i], s, c[i]));
  }
  return proof;
}

GqProof prove(const RsaPublicKey& pk, ByteView signing_input, const mpz_class& sigma,
              unsigned lambda, RandomSource& rng) {
  return prove_statement(pk, padded_message(pk, signing_input), sigma, lambda, rng);
}

bool verify_statement(const RsaPublicKey& pk, const mpz_class& x, const GqProof& proof,
                      unsigned lambda) {
  RoundParams expected;
  try {
    expected = round_count(lambda, pk.exponent);
  } catch (const Error&) {
    return false;
  }
  if (proof.rounds != expected.rounds || proof.challenge_bits != expected.challenge_bits) {
    return false;
  }
  if (proof.modulus_len != pk.modulus_bytes() || proof.key_id != pk.key_id) return false;
  if (proof.commitments.size() != proof.rounds || proof.responses.size() != proof.rounds) {
    return false;
  }
  for (unsigned i = 0; i < proof.rounds; ++i) {
    if (!in_unit_range(proof.commitments[i], pk.modulus) ||
        !in_unit_range(proof.responses[i], pk.modulus)) {
      return false;
    }
  }
  const Challenges c =
      fiat_shamir(pk, x, proof.commitments, as_bytes(proof.key_id), proof.challenge_bits);
  for (unsigned i = 0; i < proof.rounds; ++i) {
    if (!check_round(pk, x, proof.commitments[i], proof.responses[i], c[i])) return false;
  }
  return true;
}

bool verify_proof(const RsaPublicKey& pk, ByteView signing_input, const GqProof& proof,
                  unsigned lambda) {
  mpz_class x;
  try {
    x = padded_message(pk, signing_input);
  } catch (const Error&) {
    return false;
  }
  return verify_statement(pk, x, proof, lambda);
}

SimulatedTranscript simulate(const RsaPublicKey& pk, const mpz_class& x,
                             std::span<const uint64_t> challenges, RandomSource& rng) {
  mpz_class x_inv;
  mpz_class xr = x % pk.modulus;
  if (mpz_invert(x_inv.get_mpz_t(), xr.get_mpz_t(), pk.modulus.get_mpz_t()) == 0) {
    fail(ErrorCode::kCannotSimulate, "statement shares a factor with the modulus");
  }
  SimulatedTranscript out;
  for (uint64_t c : challenges) {
    mpz_class z = rng.uniform_unit(pk.modulus);
    mpz_class t = powm(z, pk.exponent, pk.modulus);
    t = (t * powm(x_inv, static_cast<unsigned long>(c), pk.modulus)) % pk.modulus;
    out.commitments.push_back(t);
    out.responses.push_back(z);
  }
  return out;
}

}  // namespace poa::gq
