#include "poa/jose/emsa.hpp"

#include <array>

#include "poa/common/bigint.hpp"
#include "poa/common/error.hpp"

namespace poa::jose {
namespace {

constexpr std::array<uint8_t, kSha256DigestInfoPrefixLen> kSha256Prefix = {
    0x30, 0x31, 0x30, 0x0d, 0x06, 0x09, 0x60, 0x86, 0x48, 0x01,
    0x65, 0x03, 0x04, 0x02, 0x01, 0x05, 0x00, 0x04, 0x20};

}  // namespace

Bytes emsa_encode_bytes(const Digest32& digest, size_t modulus_len) {
  const size_t t_len = kSha256Prefix.size() + digest.size();
  if (modulus_len < t_len + 11) {
    fail(ErrorCode::kInvalidArgument, "modulus too short for EMSA-PKCS1-v1_5/SHA-256");
  }
  Bytes em;
  em.reserve(modulus_len);
  em.push_back(0x00);
  em.push_back(0x01);
  em.insert(em.end(), modulus_len - t_len - 3, 0xFF);
  em.push_back(0x00);
  em.insert(em.end(), kSha256Prefix.begin(), kSha256Prefix.end());
  em.insert(em.end(), digest.begin(), digest.end());
  return em;
}

mpz_class emsa_encode(const Digest32& digest, size_t modulus_len) {
  return mpz_from_bytes(emsa_encode_bytes(digest, modulus_len));
}

}  // namespace poa::jose
