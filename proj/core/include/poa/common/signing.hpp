#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "poa/common/bytes.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace poa {

class RandomSource;

struct EvpKeyDeleter {
  void operator()(EVP_PKEY* key) const;
};
using EvpKeyPtr = std::unique_ptr<EVP_PKEY, EvpKeyDeleter>;

enum class KeyType { kEd25519, kEcdsaP256 };

/// Public half of a log, witness, CA or requester key.
class VerifyingKey {
 public:
  VerifyingKey() = default;
  explicit VerifyingKey(EvpKeyPtr key);

  static VerifyingKey from_der(ByteView spki);
  static VerifyingKey from_pem(std::string_view pem);

  bool valid() const { return key_ != nullptr; }
  KeyType type() const;
  bool verify(ByteView message, ByteView signature) const;

  Bytes der() const;
  std::string pem() const;
  // SHA-256 over the SubjectPublicKeyInfo DER.
  Digest32 key_id() const;
  std::string fingerprint() const;

  EVP_PKEY* get() const { return key_.get(); }

 private:
  std::shared_ptr<EVP_PKEY> key_;
};

class SigningKey {
 public:
  SigningKey() = default;
  explicit SigningKey(EvpKeyPtr key);

  // Ed25519 keys are derived from 32 bytes of the given source, so a seeded
  // source yields reproducible keys.
  static SigningKey generate_ed25519(RandomSource& rng);
  static SigningKey generate_p256();
  static SigningKey from_pem(std::string_view pem);

  bool valid() const { return key_ != nullptr; }
  KeyType type() const;
  Bytes sign(ByteView message) const;
  VerifyingKey public_key() const;
  std::string private_pem() const;

  EVP_PKEY* get() const { return key_.get(); }

 private:
  std::shared_ptr<EVP_PKEY> key_;
};

}  // namespace poa
