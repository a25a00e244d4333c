#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poa {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;
using Digest32 = std::array<uint8_t, 32>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline std::string to_string(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

inline Bytes to_bytes(std::string_view s) {
  return {s.begin(), s.end()};
}

std::string hex_encode(ByteView data);
Bytes hex_decode(std::string_view hex);
Digest32 digest_from_hex(std::string_view hex);

// RFC 4648 section 5, without padding. Decoding rejects padding and any
// character outside the url-safe alphabet.
std::string base64url_encode(ByteView data);
Bytes base64url_decode(std::string_view text);

std::string base64_encode(ByteView data);
Bytes base64_decode(std::string_view text);

void append_u16_be(Bytes& out, uint16_t v);
void append_u32_be(Bytes& out, uint32_t v);
void append_u64_be(Bytes& out, uint64_t v);
uint64_t read_u64_be(ByteView in, size_t offset);

void append(Bytes& out, ByteView data);

// Length-prefixed (u32 big-endian) field.
void append_field(Bytes& out, ByteView data);

bool contains_subsequence(ByteView haystack, ByteView needle);

}  // namespace poa
