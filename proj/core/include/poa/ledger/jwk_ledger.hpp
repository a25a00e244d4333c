#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "poa/common/clock.hpp"
#include "poa/common/signing.hpp"
#include "poa/ledger/types.hpp"
#include "poa/merkle/merkle.hpp"

namespace poa::idp {
class JwksSource;
}

namespace poa::ledger {

/// Append-only, witness-cosigned log of timestamped JWKS snapshots.
///
/// One logical log holds every issuer; adjacency for bracket queries is
/// adjacency among one issuer's entries, proven by shipping the other
/// issuers' intervening entries. Appends are serialized; reads share a lock.
class JwkLedger final : public LedgerApi {
 public:
  JwkLedger(SigningKey log_key, Clock clock);

  void add_witness(std::shared_ptr<WitnessApi> witness);
  // When set, appends are rejected (kKeysetMismatch) unless the snapshot
  // matches what the source currently serves.
  void set_jwks_source(std::shared_ptr<idp::JwksSource> source);

  VerifyingKey public_key() const { return log_key_.public_key(); }

  AppendResult append(const std::string& issuer, const jose::Jwks& jwks, int64_t now);
  // Re-signs the current tree at `now` and collects fresh cosignatures.
  SignedDigest refresh(int64_t now);
  TimestampBracket query_at(const std::string& issuer, int64_t t, int64_t now);

  std::vector<LedgerEntry> entries() const;
  uint64_t size() const;

  // LedgerApi, timed by the injected clock.
  AppendResult append(const std::string& issuer, const jose::Jwks& jwks) override;
  SignedDigest latest_digest() override;
  merkle::InclusionProof prove_inclusion(uint64_t index, uint64_t tree_size) override;
  merkle::ConsistencyProof prove_consistency(uint64_t old_size, uint64_t new_size) override;
  TimestampBracket query_at(const std::string& issuer, int64_t t) override;
  void add_cosignature(const SignedDigest& digest, const Cosignature& cosig) override;

 private:
  SignedDigest sign_locked(int64_t now);
  void cosign_locked(SignedDigest& digest, const LedgerEntry* delta);
  BracketEntry bracket_entry_locked(uint64_t index, uint64_t tree_size) const;

  SigningKey log_key_;
  Clock clock_;
  std::shared_ptr<idp::JwksSource> source_;

  mutable std::shared_mutex mu_;
  std::vector<LedgerEntry> entries_;
  merkle::Tree tree_;
  SignedDigest latest_;
  std::vector<std::shared_ptr<WitnessApi>> witnesses_;
  // Tree size and root each witness last cosigned; cosign requests carry a
  // consistency proof from there.
  std::map<std::string, SignedDigest> witness_state_;
};

/// Independent party that cosigns ledger digests after checking the update:
/// consistency with what it cosigned before, exactly one new leaf equal to
/// the delta, the delta's key set against a live fetch, and clock skew.
class Witness final : public WitnessApi {
 public:
  Witness(std::string id, SigningKey key, VerifyingKey log_key,
          std::shared_ptr<idp::JwksSource> source, Clock clock, int64_t skew = 120);

  std::string id() const override { return id_; }
  CosignOutcome cosign(const CosignRequest& request) override;
  CosignOutcome cosign(const CosignRequest& request, int64_t now);

  VerifyingKey public_key() const { return key_.public_key(); }
  std::optional<SignedDigest> last_cosigned() const;

 private:
  std::string id_;
  SigningKey key_;
  VerifyingKey log_key_;
  std::shared_ptr<idp::JwksSource> source_;
  Clock clock_;
  int64_t skew_;

  mutable std::mutex mu_;
  std::optional<SignedDigest> pinned_;
};

}  // namespace poa::ledger
