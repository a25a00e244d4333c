#include "poa/common/error.hpp"

namespace poa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidExponent: return "invalid-exponent";
    case ErrorCode::kDecode: return "decode-error";
    case ErrorCode::kSignatureMismatch: return "signature-mismatch";
    case ErrorCode::kCannotSimulate: return "cannot-simulate";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kEncryptedDisallowed: return "encrypted-disallowed";
    case ErrorCode::kUnsupportedAlgorithm: return "unsupported-algorithm";
    case ErrorCode::kKeyNotFound: return "key-not-found";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kUnknownAtTime: return "unknown-at-time";
    case ErrorCode::kDigestNotFresh: return "digest-not-fresh";
    case ErrorCode::kKeysetMismatch: return "keyset-mismatch";
    case ErrorCode::kInvalidToken: return "invalid-token";
    case ErrorCode::kInvalidPop: return "invalid-pop";
    case ErrorCode::kLedgerUnavailable: return "ledger-unavailable";
    case ErrorCode::kProofFailure: return "proof-failure";
    case ErrorCode::kCtUnavailable: return "ct-unavailable";
    case ErrorCode::kNetwork: return "network-error";
    case ErrorCode::kCrypto: return "crypto-error";
    case ErrorCode::kConfig: return "bad-config";
  }
  return "unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kConfig); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == name) return code;
  }
  return std::nullopt;
}

}  // namespace poa
