#pragma once

// Small in-memory doubles shared by the unit tests.

#include <map>
#include <mutex>
#include <string>

#include "poa/idp/idp_sim.hpp"
#include "poa/jose/jose.hpp"

namespace fakes {

// Key sets with arbitrary key material; only identity matters to the ledger.
inline poa::jose::Jwks keyset(int tag, int count = 1) {
  poa::jose::Jwks j;
  for (int i = 0; i < count; ++i) {
    poa::gq::RsaPublicKey k;
    k.modulus = mpz_class(1000003) * (2 * (tag * 16 + i) + 1);
    k.exponent = 65537;
    k.key_id = "k" + std::to_string(tag) + "-" + std::to_string(i);
    j.keys.push_back(k);
  }
  return j;
}

class MapSource final : public poa::idp::JwksSource {
 public:
  void set(const std::string& issuer, poa::jose::Jwks jwks) {
    std::lock_guard lock(mu_);
    keys_[issuer] = std::move(jwks);
  }
  poa::jose::Jwks fetch_jwks(const std::string& issuer) override {
    std::lock_guard lock(mu_);
    auto it = keys_.find(issuer);
    if (it == keys_.end()) throw std::runtime_error("unknown issuer " + issuer);
    return it->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, poa::jose::Jwks> keys_;
};

}  // namespace fakes
