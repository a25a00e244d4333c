#include "poa/common/random.hpp"

#include <algorithm>
#include <cstring>

#include <openssl/rand.h>

#include "poa/common/bigint.hpp"
#include "poa/common/error.hpp"
#include "poa/common/sha256.hpp"

namespace poa {

uint64_t RandomSource::next_u64() {
  uint8_t buf[8];
  fill(buf);
  uint64_t v = 0;
  for (uint8_t b : buf) v = (v << 8) | b;
  return v;
}

uint64_t RandomSource::uniform(uint64_t bound) {
  if (bound == 0) fail(ErrorCode::kInvalidArgument, "uniform bound must be positive");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

mpz_class RandomSource::uniform(const mpz_class& bound) {
  if (bound <= 0) fail(ErrorCode::kInvalidArgument, "uniform bound must be positive");
  const size_t bits = bit_length(bound);
  const size_t nbytes = (bits + 7) / 8;
  const unsigned excess = static_cast<unsigned>(nbytes * 8 - bits);
  Bytes buf(nbytes);
  for (;;) {
    fill(buf);
    buf[0] &= static_cast<uint8_t>(0xFF >> excess);
    mpz_class v = mpz_from_bytes(buf);
    if (v < bound) return v;
  }
}

mpz_class RandomSource::uniform_unit(const mpz_class& n) {
  for (;;) {
    mpz_class r = uniform(n);
    if (r == 0) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
    if (g == 1) return r;
  }
}

Bytes RandomSource::bytes(size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

void SystemRandom::fill(std::span<uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    fail(ErrorCode::kCrypto, "system randomness unavailable");
  }
}

SeededRandom::SeededRandom(uint64_t seed) {
  Bytes s;
  append_u64_be(s, seed);
  key_ = sha256({as_bytes("poa-seeded-rng"), s});
}

SeededRandom::SeededRandom(ByteView seed) {
  key_ = sha256({as_bytes("poa-seeded-rng"), seed});
}

void SeededRandom::fill(std::span<uint8_t> out) {
  std::lock_guard lock(mu_);
  size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == block_.size()) {
      Bytes ctr;
      append_u64_be(ctr, counter_++);
      block_ = sha256({key_, ctr});
      used_ = 0;
    }
    size_t n = std::min(out.size() - pos, block_.size() - used_);
    std::memcpy(out.data() + pos, block_.data() + used_, n);
    pos += n;
    used_ += n;
  }
}

}  // namespace poa
