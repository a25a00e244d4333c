#include "poa/common/sha256.hpp"

#include <openssl/evp.h>

#include "poa/common/error.hpp"

namespace poa {

Digest32 sha256(std::initializer_list<ByteView> parts) {
  Digest32 out{};
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(ErrorCode::kCrypto, "sha256 init failed");
  }
  for (ByteView part : parts) EVP_DigestUpdate(ctx, part.data(), part.size());
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, out.data(), &len);
  EVP_MD_CTX_free(ctx);
  return out;
}

Digest32 sha256(ByteView data) {
  return sha256({data});
}

}  // namespace poa
