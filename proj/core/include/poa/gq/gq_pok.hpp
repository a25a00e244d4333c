#pragma once

// Non-interactive Guillou-Quisquater proof of knowledge of an RSA
// PKCS#1 v1.5 signature.
//
// Statement: public key (n, e) and a padded message X. Witness: sigma with
// sigma^e = X (mod n). Each round the prover commits T = r^e, receives a
// challenge c in [0, 2^b) with b = floor(log2 e), and answers z = r * sigma^c.
// The verifier checks z^e = T * X^c. Challenges come from a SHA-256
// transcript over (tag, n, e, X, T_1..T_t, context), so the proof binds the
// key, the message and every commitment.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "poa/common/bytes.hpp"

namespace poa {
class RandomSource;
}

namespace poa::gq {

inline constexpr uint8_t kWireVersion = 0x01;
inline constexpr std::string_view kDomainTag = "poa-gq-v1";
inline constexpr unsigned kDefaultLambda = 128;

struct RsaPublicKey {
  mpz_class modulus;
  mpz_class exponent;
  std::string key_id;

  size_t modulus_bytes() const;
  // Throws kInvalidExponent / kInvalidArgument. Toy mode lifts the 512-bit
  // minimum so oracle tests can use tiny moduli.
  void validate(bool toy = false) const;

  bool operator==(const RsaPublicKey&) const = default;
};

struct RoundParams {
  unsigned rounds = 0;
  unsigned challenge_bits = 0;

  bool operator==(const RoundParams&) const = default;
};

/// t = ceil(lambda / floor(log2 e)), b = floor(log2 e).
RoundParams round_count(unsigned lambda, const mpz_class& e);

/// Integer value of EMSA-PKCS1-v1_5(SHA-256(signing_input)) at the key's
/// modulus length.
mpz_class padded_message(const RsaPublicKey& pk, ByteView signing_input);

struct GqProof {
  unsigned rounds = 0;
  unsigned challenge_bits = 0;
  size_t modulus_len = 0;
  std::vector<mpz_class> commitments;
  std::vector<mpz_class> responses;
  std::string key_id;

  // Wire format: version | t | b | L (u16 BE) | T_1..T_t | z_1..z_t | len | kid
  // with every T_i, z_i a fixed-width L-byte big-endian integer.
  Bytes encode() const;
  static GqProof decode(ByteView wire);
  size_t encoded_size() const;

  bool operator==(const GqProof&) const = default;
};

using Challenges = std::vector<uint64_t>;

/// Derives t challenge chunks of b bits each. Uses SHA-256 over the
/// transcript as a seed; when t*b exceeds 256 bits the stream is extended
/// with SHA-256(seed || counter).
Challenges fiat_shamir(const RsaPublicKey& pk, const mpz_class& x,
                       std::span<const mpz_class> commitments, ByteView context,
                       unsigned challenge_bits);

// Single-round primitives, exposed for oracle tests and the games harness.
mpz_class commit_round(const RsaPublicKey& pk, const mpz_class& r);
mpz_class respond_round(const RsaPublicKey& pk, const mpz_class& r, const mpz_class& sigma,
                        uint64_t challenge);
bool check_round(const RsaPublicKey& pk, const mpz_class& x, const mpz_class& commitment,
                 const mpz_class& response, uint64_t challenge);

/// Proves knowledge of sigma for statement X. Refuses (kSignatureMismatch)
/// when sigma^e != X mod n. The key id is the Fiat-Shamir context.
GqProof prove_statement(const RsaPublicKey& pk, const mpz_class& x, const mpz_class& sigma,
                        unsigned lambda, RandomSource& rng);

GqProof prove(const RsaPublicKey& pk, ByteView signing_input, const mpz_class& sigma,
              unsigned lambda, RandomSource& rng);

bool verify_statement(const RsaPublicKey& pk, const mpz_class& x, const GqProof& proof,
                      unsigned lambda);

bool verify_proof(const RsaPublicKey& pk, ByteView signing_input, const GqProof& proof,
                  unsigned lambda);

struct SimulatedTranscript {
  std::vector<mpz_class> commitments;
  std::vector<mpz_class> responses;
};

/// Honest-verifier simulator: for given challenges, samples z uniform in
/// Z_n^* and sets T = z^e * X^{-c}. Throws kCannotSimulate when X is not a
/// unit mod n.
SimulatedTranscript simulate(const RsaPublicKey& pk, const mpz_class& x,
                             std::span<const uint64_t> challenges, RandomSource& rng);

}  // namespace poa::gq
