#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <shared_mutex>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "poa/common/bytes.hpp"
#include "poa/common/signing.hpp"
#include "poa/ledger/types.hpp"
#include "poa/merkle/merkle.hpp"

namespace poa::ct {

/// Signed Certificate Timestamp over (log_id || timestamp_ms || SHA-256(TBS)).
struct Sct {
  Digest32 log_id{};
  int64_t timestamp_ms = 0;
  Bytes signature;

  static Bytes signed_bytes(const Digest32& log_id, int64_t timestamp_ms,
                            const Digest32& tbs_hash);
  bool verify(const VerifyingKey& ct_key, const Digest32& tbs_hash) const;

  // log_id (32) | timestamp (u64 BE) | u16 BE signature length | signature.
  // This is the certificate extension payload.
  Bytes encode() const;
  static Sct decode(ByteView wire);

  bool operator==(const Sct&) const = default;
};

// Leaf body: timestamp_ms (u64 BE) | SHA-256(TBS).
Bytes leaf_body(int64_t timestamp_ms, const Digest32& tbs_hash);

// Tree heads reuse the ledger's signed digest layout, without cosignatures.
using SignedTreeHead = ledger::SignedDigest;

class CtLogApi {
 public:
  virtual ~CtLogApi() = default;
  virtual Sct submit_precert(ByteView tbs_der) = 0;
  virtual SignedTreeHead latest_tree_head() = 0;
  virtual merkle::InclusionProof prove_inclusion(uint64_t index, uint64_t tree_size) = 0;
  virtual merkle::InclusionProof proof_by_hash(const Digest32& leaf_hash, uint64_t tree_size) = 0;
};

/// Minimal certificate transparency log. Identical precertificates are not
/// deduplicated.
class CtLog final : public CtLogApi {
 public:
  using MillisClock = std::function<int64_t()>;

  CtLog(SigningKey key, MillisClock clock_ms);

  VerifyingKey public_key() const { return key_.public_key(); }
  Digest32 log_id() const { return log_id_; }

  // Throws kMalformed when the bytes are not a DER TBSCertificate.
  Sct submit_precert(ByteView tbs_der, int64_t now_ms);
  SignedTreeHead tree_head(int64_t now_ms);
  uint64_t size() const;

  Sct submit_precert(ByteView tbs_der) override;
  SignedTreeHead latest_tree_head() override;
  merkle::InclusionProof prove_inclusion(uint64_t index, uint64_t tree_size) override;
  merkle::InclusionProof proof_by_hash(const Digest32& leaf_hash, uint64_t tree_size) override;

 private:
  SigningKey key_;
  Digest32 log_id_;
  MillisClock clock_ms_;

  mutable std::shared_mutex mu_;
  merkle::Tree tree_;
  // First index of each leaf hash, for proof-by-hash lookups.
  std::map<Digest32, uint64_t> first_index_;
};

bool is_tbs_certificate(ByteView der);

void to_json(nlohmann::json& j, const Sct& s);
void from_json(const nlohmann::json& j, Sct& s);

}  // namespace poa::ct
