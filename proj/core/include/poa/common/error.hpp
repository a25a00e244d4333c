#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace poa {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidExponent,
  kDecode,
  kSignatureMismatch,
  kCannotSimulate,
  kMalformed,
  kEncryptedDisallowed,
  kUnsupportedAlgorithm,
  kKeyNotFound,
  kNotFound,
  kUnknownAtTime,
  kDigestNotFresh,
  kKeysetMismatch,
  kInvalidToken,
  kInvalidPop,
  kLedgerUnavailable,
  kProofFailure,
  kCtUnavailable,
  kNetwork,
  kCrypto,
  kConfig,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);

/// Base exception for every failure surfaced by the library. The code is
/// stable and is what the HTTP and CLI layers map to status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace poa
