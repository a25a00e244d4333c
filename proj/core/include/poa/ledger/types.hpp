#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "poa/common/bytes.hpp"
#include "poa/common/signing.hpp"
#include "poa/jose/jose.hpp"
#include "poa/merkle/merkle.hpp"

namespace poa::ledger {

struct LedgerEntry {
  uint64_t index = 0;
  std::string issuer;
  jose::Jwks jwks;
  int64_t recorded_at = 0;
  Digest32 leaf_hash{};

  // u32 len | issuer | recorded_at (u64 BE) | u32 len | sorted-key JWKS JSON
  Bytes body() const;
  Digest32 compute_leaf_hash() const;
};

struct Cosignature {
  std::string witness_id;
  Bytes signature;

  bool operator==(const Cosignature&) const = default;
};

struct SignedDigest {
  uint64_t tree_size = 0;
  Digest32 root{};
  int64_t timestamp = 0;
  Bytes log_signature;
  std::vector<Cosignature> cosignatures;

  // tree_size (u64 BE) | root_hash (32) | timestamp (u64 BE): the exact bytes
  // the log and every witness sign.
  Bytes signed_bytes() const;

  bool operator==(const SignedDigest&) const = default;
};

struct BracketEntry {
  LedgerEntry entry;
  merkle::InclusionProof proof;
};

/// Answer to "which key set did issuer X have at time t". `between` holds
/// every entry of other issuers that sits between `before` and `after` (or
/// between `before` and the end of the tree for an open bracket), so the
/// client can check adjacency among the issuer's entries.
struct TimestampBracket {
  int64_t query_time = 0;
  BracketEntry before;
  std::optional<BracketEntry> after;
  std::vector<BracketEntry> between;
  SignedDigest digest;
};

struct AppendResult {
  LedgerEntry entry;
  SignedDigest digest;
  bool duplicate = false;
};

/// Sent by the ledger to a witness for each new digest. `delta` is absent
/// for a refresh (same tree, newer timestamp).
struct CosignRequest {
  SignedDigest proposed;
  std::optional<LedgerEntry> delta;
  std::optional<merkle::InclusionProof> delta_inclusion;
  merkle::ConsistencyProof consistency;
};

enum class CosignRefusal {
  kNone,
  kBadLogSignature,
  kInconsistent,
  kExtraEntries,
  kLeafMismatch,
  kKeysetMismatch,
  kClockSkew,
  kFetchFailed,
};

std::string_view to_string(CosignRefusal r);

struct CosignOutcome {
  std::optional<Cosignature> cosignature;
  CosignRefusal refusal = CosignRefusal::kNone;
  std::string detail;
};

struct QuorumPolicy {
  VerifyingKey log_key;
  std::map<std::string, VerifyingKey> witnesses;
  unsigned quorum = 0;
};

struct QuorumResult {
  bool accepted = false;
  bool log_signature_valid = false;
  unsigned valid_cosignatures = 0;
};

/// Accepts iff the log signature verifies and at least `quorum` distinct
/// configured witnesses have valid cosignatures over the digest.
QuorumResult client_check_quorum(const SignedDigest& digest, const QuorumPolicy& policy);

enum class BracketVerdict {
  kOk,
  kQuorum,
  kWrongIssuer,
  kLeafHash,
  kInclusion,
  kBeforeAfterQuery,
  kAfterNotAfterQuery,
  kNotAdjacent,
  kStaleDigest,
};

std::string_view to_string(BracketVerdict v);

/// Client-side bracket checks: quorum on the digest, leaf hashes recomputed
/// from entry bodies, inclusion of every entry, timestamps straddling t, and
/// adjacency of the issuer's entries.
BracketVerdict check_bracket(const TimestampBracket& bracket, const std::string& issuer,
                             int64_t t, const QuorumPolicy& policy);

// Interface to a ledger, local or remote.
class LedgerApi {
 public:
  virtual ~LedgerApi() = default;
  virtual AppendResult append(const std::string& issuer, const jose::Jwks& jwks) = 0;
  virtual SignedDigest latest_digest() = 0;
  virtual merkle::InclusionProof prove_inclusion(uint64_t index, uint64_t tree_size) = 0;
  virtual merkle::ConsistencyProof prove_consistency(uint64_t old_size, uint64_t new_size) = 0;
  virtual TimestampBracket query_at(const std::string& issuer, int64_t t) = 0;
  virtual void add_cosignature(const SignedDigest& digest, const Cosignature& cosig) = 0;
};

class WitnessApi {
 public:
  virtual ~WitnessApi() = default;
  virtual std::string id() const = 0;
  virtual CosignOutcome cosign(const CosignRequest& request) = 0;
};

// JSON wire encodings. Hashes are hex, signatures base64.
void to_json(nlohmann::json& j, const LedgerEntry& e);
void from_json(const nlohmann::json& j, LedgerEntry& e);
void to_json(nlohmann::json& j, const Cosignature& c);
void from_json(const nlohmann::json& j, Cosignature& c);
void to_json(nlohmann::json& j, const SignedDigest& d);
void from_json(const nlohmann::json& j, SignedDigest& d);
void to_json(nlohmann::json& j, const BracketEntry& b);
void from_json(const nlohmann::json& j, BracketEntry& b);
void to_json(nlohmann::json& j, const TimestampBracket& b);
void from_json(const nlohmann::json& j, TimestampBracket& b);
void to_json(nlohmann::json& j, const AppendResult& r);
void from_json(const nlohmann::json& j, AppendResult& r);
void to_json(nlohmann::json& j, const CosignRequest& r);
void from_json(const nlohmann::json& j, CosignRequest& r);
void to_json(nlohmann::json& j, const CosignOutcome& o);
void from_json(const nlohmann::json& j, CosignOutcome& o);

}  // namespace poa::ledger

namespace poa::merkle {
void to_json(nlohmann::json& j, const InclusionProof& p);
void from_json(const nlohmann::json& j, InclusionProof& p);
void to_json(nlohmann::json& j, const ConsistencyProof& p);
void from_json(const nlohmann::json& j, ConsistencyProof& p);
}  // namespace poa::merkle
