#include "poa/common/bytes.hpp"

#include <algorithm>

#include <openssl/evp.h>

#include "poa/common/error.hpp"

namespace poa {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string hex_encode(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0F]);
  }
  return out;
}

Bytes hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) fail(ErrorCode::kDecode, "odd-length hex string");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) fail(ErrorCode::kDecode, "invalid hex character");
    out.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  return out;
}

Digest32 digest_from_hex(std::string_view hex) {
  Bytes raw = hex_decode(hex);
  if (raw.size() != 32) fail(ErrorCode::kDecode, "expected a 32-byte hash");
  Digest32 out;
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

std::string base64_encode(ByteView data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                          static_cast<int>(data.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    if (c != '\n' && c != '\r' && c != ' ' && c != '\t') clean.push_back(c);
  }
  if (clean.size() % 4 != 0) fail(ErrorCode::kDecode, "base64 length not a multiple of 4");
  if (clean.empty()) return {};
  size_t pad = 0;
  if (clean.back() == '=') ++pad;
  if (clean.size() >= 2 && clean[clean.size() - 2] == '=') ++pad;
  Bytes out(clean.size() / 4 * 3);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                          static_cast<int>(clean.size()));
  if (n < 0) fail(ErrorCode::kDecode, "invalid base64");
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

std::string base64url_encode(ByteView data) {
  std::string s = base64_encode(data);
  while (!s.empty() && s.back() == '=') s.pop_back();
  for (char& c : s) {
    if (c == '+') c = '-';
    else if (c == '/') c = '_';
  }
  return s;
}

Bytes base64url_decode(std::string_view text) {
  if (text.size() % 4 == 1) fail(ErrorCode::kDecode, "invalid base64url length");
  std::string s;
  s.reserve(text.size() + 3);
  for (char c : text) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
              c == '-' || c == '_';
    if (!ok) fail(ErrorCode::kDecode, "invalid base64url character");
    s.push_back(c == '-' ? '+' : c == '_' ? '/' : c);
  }
  while (s.size() % 4 != 0) s.push_back('=');
  Bytes out = base64_decode(s);
  // Reject non-canonical trailing bits so that every byte string has exactly
  // one accepted encoding.
  if (base64url_encode(out) != text) fail(ErrorCode::kDecode, "non-canonical base64url");
  return out;
}

void append_u16_be(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void append_u32_be(Bytes& out, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<uint8_t>(v >> shift));
}

void append_u64_be(Bytes& out, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<uint8_t>(v >> shift));
}

uint64_t read_u64_be(ByteView in, size_t offset) {
  if (offset + 8 > in.size()) fail(ErrorCode::kDecode, "truncated u64");
  uint64_t v = 0;
  for (size_t i = 0; i < 8; ++i) v = (v << 8) | in[offset + i];
  return v;
}

void append(Bytes& out, ByteView data) {
  out.insert(out.end(), data.begin(), data.end());
}

void append_field(Bytes& out, ByteView data) {
  append_u32_be(out, static_cast<uint32_t>(data.size()));
  append(out, data);
}

bool contains_subsequence(ByteView haystack, ByteView needle) {
  if (needle.empty()) return true;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

}  // namespace poa
