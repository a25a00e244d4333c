#pragma once

#include <gmpxx.h>

#include "poa/common/bytes.hpp"

namespace poa {

mpz_class mpz_from_bytes(ByteView be);

// Minimal big-endian encoding; zero encodes as a single 0x00 byte.
Bytes mpz_to_bytes(const mpz_class& value);

// Fixed-width big-endian encoding. Throws kInvalidArgument when the value
// does not fit or is negative.
Bytes mpz_to_bytes(const mpz_class& value, size_t width);

size_t bit_length(const mpz_class& value);
size_t byte_length(const mpz_class& value);

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod);
mpz_class powm(const mpz_class& base, unsigned long exp, const mpz_class& mod);
mpz_class invert(const mpz_class& value, const mpz_class& mod);

}  // namespace poa
