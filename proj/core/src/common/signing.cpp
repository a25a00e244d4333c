#include "poa/common/signing.hpp"

#include <openssl/bio.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/x509.h>

#include "poa/common/error.hpp"
#include "poa/common/random.hpp"
#include "poa/common/sha256.hpp"

namespace poa {
namespace {

std::shared_ptr<EVP_PKEY> share(EvpKeyPtr key) {
  return std::shared_ptr<EVP_PKEY>(key.release(), EvpKeyDeleter{});
}

KeyType key_type_of(EVP_PKEY* key) {
  switch (EVP_PKEY_get_base_id(key)) {
    case EVP_PKEY_ED25519: return KeyType::kEd25519;
    case EVP_PKEY_EC: return KeyType::kEcdsaP256;
    default: fail(ErrorCode::kCrypto, "unsupported key type");
  }
}

// Ed25519 signs the message directly; ECDSA hashes with SHA-256.
const EVP_MD* digest_for(EVP_PKEY* key) {
  return key_type_of(key) == KeyType::kEd25519 ? nullptr : EVP_sha256();
}

std::string bio_to_string(BIO* bio) {
  char* data = nullptr;
  long len = BIO_get_mem_data(bio, &data);
  return std::string(data, static_cast<size_t>(len));
}

}  // namespace

void EvpKeyDeleter::operator()(EVP_PKEY* key) const {
  EVP_PKEY_free(key);
}

VerifyingKey::VerifyingKey(EvpKeyPtr key) : key_(share(std::move(key))) {}

VerifyingKey VerifyingKey::from_der(ByteView spki) {
  const unsigned char* p = spki.data();
  EVP_PKEY* key = d2i_PUBKEY(nullptr, &p, static_cast<long>(spki.size()));
  if (key == nullptr || p != spki.data() + spki.size()) {
    EVP_PKEY_free(key);
    fail(ErrorCode::kDecode, "invalid SubjectPublicKeyInfo");
  }
  key_type_of(key);
  return VerifyingKey(EvpKeyPtr(key));
}

VerifyingKey VerifyingKey::from_pem(std::string_view pem) {
  BIO* bio = BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size()));
  EVP_PKEY* key = PEM_read_bio_PUBKEY(bio, nullptr, nullptr, nullptr);
  BIO_free(bio);
  if (key == nullptr) fail(ErrorCode::kDecode, "invalid public key PEM");
  return VerifyingKey(EvpKeyPtr(key));
}

KeyType VerifyingKey::type() const {
  return key_type_of(key_.get());
}

bool VerifyingKey::verify(ByteView message, ByteView signature) const {
  if (!key_) return false;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  bool ok = EVP_DigestVerifyInit(ctx, nullptr, digest_for(key_.get()), nullptr, key_.get()) == 1 &&
            EVP_DigestVerify(ctx, signature.data(), signature.size(), message.data(),
                             message.size()) == 1;
  EVP_MD_CTX_free(ctx);
  return ok;
}

Bytes VerifyingKey::der() const {
  if (!key_) fail(ErrorCode::kCrypto, "empty key");
  unsigned char* buf = nullptr;
  int len = i2d_PUBKEY(key_.get(), &buf);
  if (len <= 0) fail(ErrorCode::kCrypto, "cannot encode public key");
  Bytes out(buf, buf + len);
  OPENSSL_free(buf);
  return out;
}

std::string VerifyingKey::pem() const {
  BIO* bio = BIO_new(BIO_s_mem());
  PEM_write_bio_PUBKEY(bio, key_.get());
  std::string out = bio_to_string(bio);
  BIO_free(bio);
  return out;
}

Digest32 VerifyingKey::key_id() const {
  return sha256(der());
}

std::string VerifyingKey::fingerprint() const {
  return hex_encode(key_id());
}

SigningKey::SigningKey(EvpKeyPtr key) : key_(share(std::move(key))) {}

SigningKey SigningKey::generate_ed25519(RandomSource& rng) {
  Bytes seed = rng.bytes(32);
  EVP_PKEY* key = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size());
  if (key == nullptr) fail(ErrorCode::kCrypto, "Ed25519 key generation failed");
  return SigningKey(EvpKeyPtr(key));
}

SigningKey SigningKey::generate_p256() {
  EVP_PKEY* key = EVP_EC_gen("P-256");
  if (key == nullptr) fail(ErrorCode::kCrypto, "P-256 key generation failed");
  return SigningKey(EvpKeyPtr(key));
}

SigningKey SigningKey::from_pem(std::string_view pem) {
  BIO* bio = BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size()));
  EVP_PKEY* key = PEM_read_bio_PrivateKey(bio, nullptr, nullptr, nullptr);
  BIO_free(bio);
  if (key == nullptr) fail(ErrorCode::kDecode, "invalid private key PEM");
  key_type_of(key);
  return SigningKey(EvpKeyPtr(key));
}

KeyType SigningKey::type() const {
  return key_type_of(key_.get());
}

Bytes SigningKey::sign(ByteView message) const {
  if (!key_) fail(ErrorCode::kCrypto, "empty signing key");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  size_t len = 0;
  Bytes out;
  bool ok = EVP_DigestSignInit(ctx, nullptr, digest_for(key_.get()), nullptr, key_.get()) == 1 &&
            EVP_DigestSign(ctx, nullptr, &len, message.data(), message.size()) == 1;
  if (ok) {
    out.resize(len);
    ok = EVP_DigestSign(ctx, out.data(), &len, message.data(), message.size()) == 1;
    out.resize(len);
  }
  EVP_MD_CTX_free(ctx);
  if (!ok) fail(ErrorCode::kCrypto, "signing failed");
  return out;
}

VerifyingKey SigningKey::public_key() const {
  unsigned char* buf = nullptr;
  int len = i2d_PUBKEY(key_.get(), &buf);
  if (len <= 0) fail(ErrorCode::kCrypto, "cannot extract public key");
  Bytes der(buf, buf + len);
  OPENSSL_free(buf);
  return VerifyingKey::from_der(der);
}

std::string SigningKey::private_pem() const {
  BIO* bio = BIO_new(BIO_s_mem());
  PEM_write_bio_PrivateKey(bio, key_.get(), nullptr, nullptr, 0, nullptr, nullptr);
  std::string out = bio_to_string(bio);
  BIO_free(bio);
  return out;
}

}  // namespace poa
