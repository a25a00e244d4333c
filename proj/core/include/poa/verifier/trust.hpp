#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "poa/ca/x509.hpp"
#include "poa/common/signing.hpp"
#include "poa/jose/jose.hpp"
#include "poa/ledger/types.hpp"

namespace poa::verifier {

/// Keys and parameters a verifier receives out of band.
struct TrustRoots {
  ca::Certificate ca_root;
  VerifyingKey ledger_key;
  std::map<std::string, VerifyingKey> witness_keys;
  unsigned quorum = 0;
  VerifyingKey ct_key;
  std::string expected_issuer;
  std::string expected_ca_audience = "poa-ca";
  unsigned lambda = 128;
  int64_t cert_lifetime = 600;
  int64_t clock_skew = jose::kDefaultClockSkew;
  ca::PoaOids oids;

  // Throws kConfig when keys are missing or quorum exceeds the witness count.
  void validate() const;
  ledger::QuorumPolicy quorum_policy() const;

  // Keys are PEM strings; stable field order.
  std::string to_json() const;
  static TrustRoots from_json(std::string_view text);
};

}  // namespace poa::verifier
