#pragma once

#include <string>

#include "poa/common/error.hpp"

namespace poa::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitRejected = 1,        // verify: certificate rejected; games: property breach
  kExitMalformedInput = 2,  // unreadable PEM / DER / JSON input
  kExitBadConfig = 3,       // config file, flags, missing keys
  kExitNetwork = 4,         // port in use, service unreachable
  kExitInvalidToken = 5,    // CA refused the token or proof of possession
  kExitLedgerUnavailable = 6,
  kExitCtUnavailable = 7,
  kExitProofFailure = 8,
  kExitInternal = 9,
};

inline const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success (verify: certificate accepted)\n"
    "  1  verify: certificate rejected; games: a property was breached\n"
    "  2  malformed input (certificate PEM/DER, trust file, JSON)\n"
    "  3  bad configuration or flags, missing key file without --generate\n"
    "  4  network failure: port in use or service unreachable\n"
    "  5  CA refused the token or the proof of possession\n"
    "  6  CA refused: JWK ledger unavailable or no witness quorum\n"
    "  7  CA refused: CT log unavailable\n"
    "  8  CA refused: proof generation failed (IdP signature inconsistent)\n"
    "  9  internal error\n";

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return kExitBadConfig;
    case ErrorCode::kNetwork: return kExitNetwork;
    case ErrorCode::kInvalidToken:
    case ErrorCode::kInvalidPop: return kExitInvalidToken;
    case ErrorCode::kLedgerUnavailable: return kExitLedgerUnavailable;
    case ErrorCode::kCtUnavailable: return kExitCtUnavailable;
    case ErrorCode::kProofFailure: return kExitProofFailure;
    case ErrorCode::kMalformed:
    case ErrorCode::kDecode: return kExitMalformedInput;
    default: return kExitInternal;
  }
}

}  // namespace poa::cli
