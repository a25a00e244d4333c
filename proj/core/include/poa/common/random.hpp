#pragma once

#include <cstdint>
#include <mutex>
#include <span>

#include <gmpxx.h>

#include "poa/common/bytes.hpp"

namespace poa {

/// Source of randomness used by provers, key generators and the CA. All
/// implementations are safe to share across threads.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<uint8_t> out) = 0;

  uint64_t next_u64();
  // Uniform in [0, bound) by rejection sampling.
  uint64_t uniform(uint64_t bound);
  mpz_class uniform(const mpz_class& bound);
  // Uniform in the multiplicative group mod n (redraws on gcd != 1).
  mpz_class uniform_unit(const mpz_class& n);
  Bytes bytes(size_t n);
};

class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<uint8_t> out) override;
};

/// SHA-256 counter-mode stream keyed by a seed. Reproducible; used by tests,
/// the games harness and the CLI's --seed flag.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(uint64_t seed);
  explicit SeededRandom(ByteView seed);

  void fill(std::span<uint8_t> out) override;

 private:
  std::mutex mu_;
  Digest32 key_{};
  uint64_t counter_ = 0;
  Digest32 block_{};
  size_t used_ = 32;
};

}  // namespace poa
