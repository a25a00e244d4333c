#include "poa/common/bigint.hpp"

#include "poa/common/error.hpp"

namespace poa {

mpz_class mpz_from_bytes(ByteView be) {
  mpz_class out;
  if (be.empty()) return out;
  mpz_import(out.get_mpz_t(), be.size(), 1, 1, 1, 0, be.data());
  return out;
}

size_t bit_length(const mpz_class& value) {
  if (value == 0) return 0;
  return mpz_sizeinbase(value.get_mpz_t(), 2);
}

size_t byte_length(const mpz_class& value) {
  return (bit_length(value) + 7) / 8;
}

Bytes mpz_to_bytes(const mpz_class& value) {
  if (value < 0) fail(ErrorCode::kInvalidArgument, "negative integer");
  if (value == 0) return Bytes{0};
  Bytes out(byte_length(value));
  size_t count = 0;
  mpz_export(out.data(), &count, 1, 1, 1, 0, value.get_mpz_t());
  out.resize(count);
  return out;
}

Bytes mpz_to_bytes(const mpz_class& value, size_t width) {
  if (value < 0) fail(ErrorCode::kInvalidArgument, "negative integer");
  size_t len = byte_length(value);
  if (len > width) fail(ErrorCode::kInvalidArgument, "integer does not fit fixed width");
  Bytes out(width, 0);
  if (len > 0) {
    size_t count = 0;
    mpz_export(out.data() + (width - len), &count, 1, 1, 1, 0, value.get_mpz_t());
  }
  return out;
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

mpz_class powm(const mpz_class& base, unsigned long exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm_ui(out.get_mpz_t(), base.get_mpz_t(), exp, mod.get_mpz_t());
  return out;
}

mpz_class invert(const mpz_class& value, const mpz_class& mod) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), value.get_mpz_t(), mod.get_mpz_t()) == 0) {
    fail(ErrorCode::kInvalidArgument, "value not invertible");
  }
  return out;
}

}  // namespace poa
