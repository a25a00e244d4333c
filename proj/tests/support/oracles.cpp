#include "oracles.hpp"

#include <openssl/evp.h>
#include <openssl/rsa.h>
#include <openssl/sha.h>
#include <openssl/bn.h>
#include <openssl/core_names.h>

#include <cmath>
#include <stdexcept>

namespace oracle {
namespace {

Digest32 hash_with_prefix(uint8_t prefix, const Bytes& a, const Bytes& b = {}) {
  Bytes in{prefix};
  in.insert(in.end(), a.begin(), a.end());
  in.insert(in.end(), b.begin(), b.end());
  return sha256(in);
}

Bytes as_vec(const Digest32& d) {
  return Bytes(d.begin(), d.end());
}

// Largest power of two strictly smaller than n (n > 1).
size_t split_point(size_t n) {
  size_t k = 1;
  while (k * 2 < n) k *= 2;
  return k;
}

std::vector<Digest32> subproof(size_t m, const std::vector<Bytes>& leaves, size_t begin, size_t end,
                               bool complete) {
  const size_t n = end - begin;
  if (m == n) {
    if (complete) return {};
    return {mth(leaves, begin, end)};
  }
  const size_t k = split_point(n);
  std::vector<Digest32> out;
  if (m <= k) {
    out = subproof(m, leaves, begin, begin + k, complete);
    out.push_back(mth(leaves, begin + k, end));
  } else {
    out = subproof(m - k, leaves, begin + k, end, false);
    out.push_back(mth(leaves, begin, begin + k));
  }
  return out;
}

}  // namespace

Digest32 sha256(const Bytes& data) {
  Digest32 out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Digest32 mth(const std::vector<Bytes>& leaves, size_t begin, size_t end) {
  const size_t n = end - begin;
  if (n == 0) return sha256({});
  if (n == 1) return hash_with_prefix(0x00, leaves[begin]);
  const size_t k = split_point(n);
  return hash_with_prefix(0x01, as_vec(mth(leaves, begin, begin + k)), as_vec(mth(leaves, begin + k, end)));
}

Digest32 mth(const std::vector<Bytes>& leaves) {
  return mth(leaves, 0, leaves.size());
}

std::vector<Digest32> path(size_t m, const std::vector<Bytes>& leaves, size_t begin, size_t end) {
  const size_t n = end - begin;
  if (n == 1) return {};
  const size_t k = split_point(n);
  std::vector<Digest32> out;
  if (m < k) {
    out = path(m, leaves, begin, begin + k);
    out.push_back(mth(leaves, begin + k, end));
  } else {
    out = path(m - k, leaves, begin + k, end);
    out.push_back(mth(leaves, begin, begin + k));
  }
  return out;
}

std::vector<Digest32> consistency(size_t m, const std::vector<Bytes>& leaves, size_t n) {
  return subproof(m, leaves, 0, n, true);
}

unsigned ilog2(const mpz_class& e) {
  mpz_class v = e;
  unsigned k = 0;
  while (v > 1) {
    v /= 2;
    ++k;
  }
  return k;
}

uint64_t powmod(uint64_t base, uint64_t exp, uint64_t mod) {
  uint64_t result = 1 % mod;
  base %= mod;
  while (exp > 0) {
    if (exp & 1) result = result * base % mod;
    base = base * base % mod;
    exp >>= 1;
  }
  return result;
}

Bytes emsa_sha256(const Digest32& digest, size_t k) {
  // DigestInfo ::= SEQUENCE { SEQUENCE { OID sha256, NULL }, OCTET STRING (32) }
  static const uint8_t kPrefix[] = {0x30, 0x31, 0x30, 0x0d, 0x06, 0x09, 0x60, 0x86, 0x48, 0x01,
                                    0x65, 0x03, 0x04, 0x02, 0x01, 0x05, 0x00, 0x04, 0x20};
  const size_t t_len = sizeof kPrefix + digest.size();
  if (k < t_len + 11) throw std::invalid_argument("intended encoded message length too short");
  Bytes em;
  em.push_back(0x00);
  em.push_back(0x01);
  em.insert(em.end(), k - t_len - 3, 0xff);
  em.push_back(0x00);
  em.insert(em.end(), std::begin(kPrefix), std::end(kPrefix));
  em.insert(em.end(), digest.begin(), digest.end());
  return em;
}

OpensslRsa openssl_rs256(unsigned bits, const std::string& message) {
  EVP_PKEY* pkey = EVP_RSA_gen(bits);
  if (pkey == nullptr) throw std::runtime_error("EVP_RSA_gen failed");
  OpensslRsa out;
  BIGNUM* n = nullptr;
  BIGNUM* e = nullptr;
  EVP_PKEY_get_bn_param(pkey, OSSL_PKEY_PARAM_RSA_N, &n);
  EVP_PKEY_get_bn_param(pkey, OSSL_PKEY_PARAM_RSA_E, &e);
  char* n_hex = BN_bn2hex(n);
  char* e_hex = BN_bn2hex(e);
  out.n.set_str(n_hex, 16);
  out.e.set_str(e_hex, 16);
  OPENSSL_free(n_hex);
  OPENSSL_free(e_hex);
  BN_free(n);
  BN_free(e);

  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  size_t len = 0;
  EVP_DigestSignInit(ctx, nullptr, EVP_sha256(), nullptr, pkey);
  EVP_DigestSign(ctx, nullptr, &len, reinterpret_cast<const uint8_t*>(message.data()), message.size());
  out.signature.resize(len);
  EVP_DigestSign(ctx, out.signature.data(), &len, reinterpret_cast<const uint8_t*>(message.data()),
                 message.size());
  out.signature.resize(len);
  EVP_MD_CTX_free(ctx);
  EVP_PKEY_free(pkey);
  return out;
}

double chi_square_two_sample(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
  double total_a = 0;
  double total_b = 0;
  for (auto v : a) total_a += static_cast<double>(v);
  for (auto v : b) total_b += static_cast<double>(v);
  const double ka = std::sqrt(total_b / total_a);
  const double kb = std::sqrt(total_a / total_b);
  double chi = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double sum = static_cast<double>(a[i] + b[i]);
    if (sum == 0) continue;
    const double d = ka * static_cast<double>(a[i]) - kb * static_cast<double>(b[i]);
    chi += d * d / sum;
  }
  return chi;
}

}  // namespace oracle
