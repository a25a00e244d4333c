#include "poa/ledger/jwk_ledger.hpp"

#include <algorithm>
#include <mutex>

#include "poa/common/error.hpp"
#include "poa/idp/idp_sim.hpp"

namespace poa::ledger {

JwkLedger::JwkLedger(SigningKey log_key, Clock clock)
    : log_key_(std::move(log_key)), clock_(std::move(clock)) {
  latest_ = sign_locked(clock_());
}

void JwkLedger::add_witness(std::shared_ptr<WitnessApi> witness) {
  std::unique_lock lock(mu_);
  witnesses_.push_back(std::move(witness));
}

void JwkLedger::set_jwks_source(std::shared_ptr<idp::JwksSource> source) {
  std::unique_lock lock(mu_);
  source_ = std::move(source);
}

SignedDigest JwkLedger::sign_locked(int64_t now) {
  SignedDigest d;
  d.tree_size = tree_.size();
  d.root = tree_.root();
  d.timestamp = std::max(now, latest_.timestamp);
  d.log_signature = log_key_.sign(d.signed_bytes());
  return d;
}

void JwkLedger::cosign_locked(SignedDigest& digest, const LedgerEntry* delta) {
  for (const auto& witness : witnesses_) {
    const std::string id = witness->id();
    CosignRequest req;
    req.proposed = digest;
    const SignedDigest& prev = witness_state_[id];
    req.consistency.old_size = prev.tree_size;
    req.consistency.new_size = digest.tree_size;
    if (prev.tree_size > 0 && prev.tree_size <= digest.tree_size) {
      req.consistency = tree_.prove_consistency(prev.tree_size, digest.tree_size);
    }
    if (delta != nullptr) {
      req.delta = *delta;
      req.delta_inclusion = tree_.prove_inclusion(delta->index, digest.tree_size);
    }
    CosignOutcome outcome;
    try {
      outcome = witness->cosign(req);
    } catch (const std::exception&) {
      // Unreachable witnesses simply do not contribute to the quorum.
      continue;
    }
    if (outcome.cosignature) {
      digest.cosignatures.push_back(*outcome.cosignature);
      witness_state_[id] = digest;
    }
  }
}

AppendResult JwkLedger::append(const std::string& issuer, const jose::Jwks& jwks, int64_t now) {
  std::unique_lock lock(mu_);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->issuer != issuer) continue;
    if (it->jwks.same_keys(jwks)) return AppendResult{*it, latest_, true};
    break;
  }
  if (source_) {
    if (!source_->fetch_jwks(issuer).same_keys(jwks)) {
      fail(ErrorCode::kKeysetMismatch, "submitted key set differs from the issuer's live JWKS");
    }
  }
  LedgerEntry entry;
  entry.index = tree_.size();
  entry.issuer = issuer;
  entry.jwks.keys = jwks.keys;
  entry.recorded_at = entries_.empty() ? now : std::max(now, entries_.back().recorded_at);
  entry.leaf_hash = entry.compute_leaf_hash();
  entries_.push_back(entry);
  tree_.append(entry.leaf_hash);
  SignedDigest digest = sign_locked(now);
  cosign_locked(digest, &entry);
  latest_ = digest;
  return AppendResult{entry, digest, false};
}

SignedDigest JwkLedger::refresh(int64_t now) {
  std::unique_lock lock(mu_);
  SignedDigest digest = sign_locked(now);
  cosign_locked(digest, nullptr);
  latest_ = digest;
  return digest;
}

BracketEntry JwkLedger::bracket_entry_locked(uint64_t index, uint64_t tree_size) const {
  return BracketEntry{entries_[index], tree_.prove_inclusion(index, tree_size)};
}

TimestampBracket JwkLedger::query_at(const std::string& issuer, int64_t t, int64_t now) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    {
      std::shared_lock lock(mu_);
      const uint64_t size = latest_.tree_size;
      std::optional<uint64_t> before;
      std::optional<uint64_t> after;
      for (uint64_t i = 0; i < size; ++i) {
        if (entries_[i].issuer != issuer) continue;
        if (entries_[i].recorded_at <= t) {
          before = i;
        } else {
          after = i;
          break;
        }
      }
      if (!before) fail(ErrorCode::kUnknownAtTime, "no key set recorded for issuer at that time");
      if (after || latest_.timestamp >= t) {
        TimestampBracket out;
        out.query_time = t;
        out.digest = latest_;
        out.before = bracket_entry_locked(*before, size);
        const uint64_t end = after ? *after : size;
        for (uint64_t i = *before + 1; i < end; ++i) {
          out.between.push_back(bracket_entry_locked(i, size));
        }
        if (after) out.after = bracket_entry_locked(*after, size);
        return out;
      }
    }
    // Open bracket whose digest predates t: a fresh cosigned digest is the
    // proof that nothing was appended up to t.
    if (now < t) fail(ErrorCode::kDigestNotFresh, "query time is in the ledger's future");
    refresh(now);
  }
  fail(ErrorCode::kDigestNotFresh, "could not obtain a fresh digest");
}

std::vector<LedgerEntry> JwkLedger::entries() const {
  std::shared_lock lock(mu_);
  return entries_;
}

uint64_t JwkLedger::size() const {
  std::shared_lock lock(mu_);
  return tree_.size();
}

AppendResult JwkLedger::append(const std::string& issuer, const jose::Jwks& jwks) {
  return append(issuer, jwks, clock_());
}

SignedDigest JwkLedger::latest_digest() {
  std::shared_lock lock(mu_);
  return latest_;
}

merkle::InclusionProof JwkLedger::prove_inclusion(uint64_t index, uint64_t tree_size) {
  std::shared_lock lock(mu_);
  return tree_.prove_inclusion(index, tree_size);
}

merkle::ConsistencyProof JwkLedger::prove_consistency(uint64_t old_size, uint64_t new_size) {
  std::shared_lock lock(mu_);
  return tree_.prove_consistency(old_size, new_size);
}

TimestampBracket JwkLedger::query_at(const std::string& issuer, int64_t t) {
  return query_at(issuer, t, clock_());
}

void JwkLedger::add_cosignature(const SignedDigest& digest, const Cosignature& cosig) {
  std::unique_lock lock(mu_);
  if (digest.tree_size != latest_.tree_size || digest.root != latest_.root ||
      digest.timestamp != latest_.timestamp) {
    fail(ErrorCode::kNotFound, "cosignature is not for the latest digest");
  }
  for (const auto& existing : latest_.cosignatures) {
    if (existing.witness_id == cosig.witness_id) return;
  }
  latest_.cosignatures.push_back(cosig);
  witness_state_[cosig.witness_id] = latest_;
}

Witness::Witness(std::string id, SigningKey key, VerifyingKey log_key,
                 std::shared_ptr<idp::JwksSource> source, Clock clock, int64_t skew)
    : id_(std::move(id)),
      key_(std::move(key)),
      log_key_(std::move(log_key)),
      source_(std::move(source)),
      clock_(std::move(clock)),
      skew_(skew) {}

std::optional<SignedDigest> Witness::last_cosigned() const {
  std::lock_guard lock(mu_);
  return pinned_;
}

CosignOutcome Witness::cosign(const CosignRequest& request) {
  return cosign(request, clock_());
}

CosignOutcome Witness::cosign(const CosignRequest& request, int64_t now) {
  auto refuse = [](CosignRefusal r, std::string detail) {
    CosignOutcome out;
    out.refusal = r;
    out.detail = std::move(detail);
    return out;
  };
  std::lock_guard lock(mu_);
  const SignedDigest& proposed = request.proposed;
  if (!log_key_.verify(proposed.signed_bytes(), proposed.log_signature)) {
    return refuse(CosignRefusal::kBadLogSignature, "log signature does not verify");
  }

  const uint64_t old_size = pinned_ ? pinned_->tree_size : 0;
  const merkle::ConsistencyProof& cp = request.consistency;
  if (cp.old_size != old_size || cp.new_size != proposed.tree_size) {
    return refuse(CosignRefusal::kInconsistent, "consistency proof does not start at pinned size");
  }
  if (old_size > 0 && !merkle::verify_consistency(cp, pinned_->root, proposed.root)) {
    return refuse(CosignRefusal::kInconsistent, "consistency proof failed");
  }
  if (pinned_ && proposed.timestamp < pinned_->timestamp) {
    return refuse(CosignRefusal::kClockSkew, "digest timestamp went backwards");
  }
  if (proposed.timestamp > now + skew_ || proposed.timestamp < now - skew_) {
    return refuse(CosignRefusal::kClockSkew, "digest timestamp outside witness clock skew");
  }

  const uint64_t expected_size = old_size + (request.delta ? 1 : 0);
  if (proposed.tree_size != expected_size) {
    return refuse(CosignRefusal::kExtraEntries, "update adds entries other than the delta");
  }
  if (request.delta) {
    const LedgerEntry& delta = *request.delta;
    if (delta.index != old_size || delta.compute_leaf_hash() != delta.leaf_hash ||
        !request.delta_inclusion || request.delta_inclusion->index != old_size ||
        request.delta_inclusion->tree_size != proposed.tree_size ||
        !merkle::verify_inclusion(delta.leaf_hash, *request.delta_inclusion, proposed.root)) {
      return refuse(CosignRefusal::kLeafMismatch, "new leaf is not the submitted key set");
    }
    if (delta.recorded_at > now + skew_ || delta.recorded_at < now - skew_) {
      return refuse(CosignRefusal::kClockSkew, "entry timestamp outside witness clock skew");
    }
    jose::Jwks live;
    try {
      live = source_->fetch_jwks(delta.issuer);
    } catch (const std::exception& e) {
      return refuse(CosignRefusal::kFetchFailed, e.what());
    }
    if (!live.same_keys(delta.jwks)) {
      return refuse(CosignRefusal::kKeysetMismatch, "key set differs from the live JWKS");
    }
  }

  CosignOutcome out;
  out.cosignature = Cosignature{id_, key_.sign(proposed.signed_bytes())};
  SignedDigest pinned = proposed;
  pinned.cosignatures.clear();
  pinned_ = pinned;
  return out;
}

}  // namespace poa::ledger
