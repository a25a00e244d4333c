#pragma once

#include <cstddef>

#include <gmpxx.h>

#include "poa/common/bytes.hpp"

namespace poa::jose {

// DER DigestInfo prefix for SHA-256 (RFC 8017 section 9.2, note 1).
inline constexpr size_t kSha256DigestInfoPrefixLen = 19;
// 3 framing bytes + 8 bytes minimum padding + 19 + 32.
inline constexpr size_t kMinModulusLen = 62;

/// EMSA-PKCS1-v1_5 with SHA-256: 0x00 01 FF..FF 00 || DigestInfo || digest,
/// interpreted as a big-endian integer. `modulus_len` is the byte length of
/// the RSA modulus.
mpz_class emsa_encode(const Digest32& digest, size_t modulus_len);

Bytes emsa_encode_bytes(const Digest32& digest, size_t modulus_len);

}  // namespace poa::jose
