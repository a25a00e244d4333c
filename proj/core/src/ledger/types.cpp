#include "poa/ledger/types.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "poa/common/error.hpp"

namespace poa::ledger {

using nlohmann::json;

Bytes LedgerEntry::body() const {
  Bytes out;
  append_field(out, as_bytes(issuer));
  append_u64_be(out, static_cast<uint64_t>(recorded_at));
  append_field(out, as_bytes(jwks.to_json()));
  return out;
}

Digest32 LedgerEntry::compute_leaf_hash() const {
  return merkle::leaf_hash(body());
}

Bytes SignedDigest::signed_bytes() const {
  Bytes out;
  append_u64_be(out, tree_size);
  append(out, root);
  append_u64_be(out, static_cast<uint64_t>(timestamp));
  return out;
}

std::string_view to_string(CosignRefusal r) {
  switch (r) {
    case CosignRefusal::kNone: return "none";
    case CosignRefusal::kBadLogSignature: return "bad-log-signature";
    case CosignRefusal::kInconsistent: return "inconsistent";
    case CosignRefusal::kExtraEntries: return "extra-entries";
    case CosignRefusal::kLeafMismatch: return "leaf-mismatch";
    case CosignRefusal::kKeysetMismatch: return "keyset-mismatch";
    case CosignRefusal::kClockSkew: return "clock-skew";
    case CosignRefusal::kFetchFailed: return "fetch-failed";
  }
  return "unknown";
}

std::string_view to_string(BracketVerdict v) {
  switch (v) {
    case BracketVerdict::kOk: return "ok";
    case BracketVerdict::kQuorum: return "quorum-not-met";
    case BracketVerdict::kWrongIssuer: return "wrong-issuer";
    case BracketVerdict::kLeafHash: return "leaf-hash-mismatch";
    case BracketVerdict::kInclusion: return "inclusion-proof-failed";
    case BracketVerdict::kBeforeAfterQuery: return "first-entry-after-query-time";
    case BracketVerdict::kAfterNotAfterQuery: return "second-entry-not-after-query-time";
    case BracketVerdict::kNotAdjacent: return "entries-not-adjacent";
    case BracketVerdict::kStaleDigest: return "digest-older-than-query-time";
  }
  return "unknown";
}

QuorumResult client_check_quorum(const SignedDigest& digest, const QuorumPolicy& policy) {
  QuorumResult result;
  const Bytes msg = digest.signed_bytes();
  result.log_signature_valid = policy.log_key.verify(msg, digest.log_signature);
  std::set<std::string> counted;
  for (const auto& cosig : digest.cosignatures) {
    if (counted.count(cosig.witness_id) != 0) continue;
    auto it = policy.witnesses.find(cosig.witness_id);
    if (it == policy.witnesses.end()) continue;
    if (it->second.verify(msg, cosig.signature)) counted.insert(cosig.witness_id);
  }
  result.valid_cosignatures = static_cast<unsigned>(counted.size());
  result.accepted = result.log_signature_valid && policy.quorum > 0 &&
                    result.valid_cosignatures >= policy.quorum;
  return result;
}

BracketVerdict check_bracket(const TimestampBracket& bracket, const std::string& issuer,
                             int64_t t, const QuorumPolicy& policy) {
  const SignedDigest& digest = bracket.digest;
  if (!client_check_quorum(digest, policy).accepted) return BracketVerdict::kQuorum;

  auto check_entry = [&](const BracketEntry& b) {
    if (b.entry.compute_leaf_hash() != b.entry.leaf_hash) return BracketVerdict::kLeafHash;
    if (b.proof.index != b.entry.index || b.proof.tree_size != digest.tree_size ||
        !merkle::verify_inclusion(b.entry.leaf_hash, b.proof, digest.root)) {
      return BracketVerdict::kInclusion;
    }
    return BracketVerdict::kOk;
  };

  const BracketEntry& before = bracket.before;
  if (before.entry.issuer != issuer) return BracketVerdict::kWrongIssuer;
  if (before.entry.recorded_at > t) return BracketVerdict::kBeforeAfterQuery;
  if (auto v = check_entry(before); v != BracketVerdict::kOk) return v;

  uint64_t expected = before.entry.index + 1;
  for (const auto& b : bracket.between) {
    if (b.entry.index != expected || b.entry.issuer == issuer) return BracketVerdict::kNotAdjacent;
    if (auto v = check_entry(b); v != BracketVerdict::kOk) return v;
    ++expected;
  }
  if (bracket.after) {
    const BracketEntry& after = *bracket.after;
    if (after.entry.index != expected) return BracketVerdict::kNotAdjacent;
    if (after.entry.issuer != issuer) return BracketVerdict::kWrongIssuer;
    if (after.entry.recorded_at <= t) return BracketVerdict::kAfterNotAfterQuery;
    if (auto v = check_entry(after); v != BracketVerdict::kOk) return v;
  } else {
    if (expected != digest.tree_size) return BracketVerdict::kNotAdjacent;
    if (digest.timestamp < t) return BracketVerdict::kStaleDigest;
  }
  return BracketVerdict::kOk;
}

void to_json(json& j, const LedgerEntry& e) {
  j = json{{"index", e.index},
           {"issuer", e.issuer},
           {"jwks", json::parse(e.jwks.to_json())},
           {"recorded_at", e.recorded_at},
           {"leaf_hash", hex_encode(e.leaf_hash)}};
}

void from_json(const json& j, LedgerEntry& e) {
  e.index = j.at("index").get<uint64_t>();
  e.issuer = j.at("issuer").get<std::string>();
  e.jwks = jose::Jwks::from_json(j.at("jwks").dump());
  e.recorded_at = j.at("recorded_at").get<int64_t>();
  e.leaf_hash = digest_from_hex(j.at("leaf_hash").get<std::string>());
}

void to_json(json& j, const Cosignature& c) {
  j = json{{"witness_id", c.witness_id}, {"signature", base64_encode(c.signature)}};
}

void from_json(const json& j, Cosignature& c) {
  c.witness_id = j.at("witness_id").get<std::string>();
  c.signature = base64_decode(j.at("signature").get<std::string>());
}

void to_json(json& j, const SignedDigest& d) {
  j = json{{"tree_size", d.tree_size},
           {"root_hash", hex_encode(d.root)},
           {"timestamp", d.timestamp},
           {"log_signature", base64_encode(d.log_signature)},
           {"witness_cosignatures", d.cosignatures}};
}

void from_json(const json& j, SignedDigest& d) {
  d.tree_size = j.at("tree_size").get<uint64_t>();
  d.root = digest_from_hex(j.at("root_hash").get<std::string>());
  d.timestamp = j.at("timestamp").get<int64_t>();
  d.log_signature = base64_decode(j.at("log_signature").get<std::string>());
  d.cosignatures = j.value("witness_cosignatures", std::vector<Cosignature>{});
}

void to_json(json& j, const BracketEntry& b) {
  j = json{{"entry", b.entry}, {"inclusion", b.proof}};
}

void from_json(const json& j, BracketEntry& b) {
  b.entry = j.at("entry").get<LedgerEntry>();
  b.proof = j.at("inclusion").get<merkle::InclusionProof>();
}

void to_json(json& j, const TimestampBracket& b) {
  j = json{{"query_time", b.query_time},
           {"before", b.before},
           {"between", b.between},
           {"digest", b.digest}};
  j["after"] = b.after ? json(*b.after) : json(nullptr);
}

void from_json(const json& j, TimestampBracket& b) {
  b.query_time = j.at("query_time").get<int64_t>();
  b.before = j.at("before").get<BracketEntry>();
  b.between = j.value("between", std::vector<BracketEntry>{});
  b.digest = j.at("digest").get<SignedDigest>();
  if (j.contains("after") && !j["after"].is_null()) b.after = j["after"].get<BracketEntry>();
}

void to_json(json& j, const AppendResult& r) {
  j = json{{"entry", r.entry}, {"digest", r.digest}, {"duplicate", r.duplicate}};
}

void from_json(const json& j, AppendResult& r) {
  r.entry = j.at("entry").get<LedgerEntry>();
  r.digest = j.at("digest").get<SignedDigest>();
  r.duplicate = j.at("duplicate").get<bool>();
}

void to_json(json& j, const CosignRequest& r) {
  j = json{{"proposed", r.proposed}, {"consistency", r.consistency}};
  j["delta"] = r.delta ? json(*r.delta) : json(nullptr);
  j["delta_inclusion"] = r.delta_inclusion ? json(*r.delta_inclusion) : json(nullptr);
}

void from_json(const json& j, CosignRequest& r) {
  r.proposed = j.at("proposed").get<SignedDigest>();
  r.consistency = j.at("consistency").get<merkle::ConsistencyProof>();
  if (j.contains("delta") && !j["delta"].is_null()) r.delta = j["delta"].get<LedgerEntry>();
  if (j.contains("delta_inclusion") && !j["delta_inclusion"].is_null()) {
    r.delta_inclusion = j["delta_inclusion"].get<merkle::InclusionProof>();
  }
}

void to_json(json& j, const CosignOutcome& o) {
  j = json{{"refusal", to_string(o.refusal)}, {"detail", o.detail}};
  j["cosignature"] = o.cosignature ? json(*o.cosignature) : json(nullptr);
}

void from_json(const json& j, CosignOutcome& o) {
  static const std::map<std::string, CosignRefusal> kByName = {
      {"none", CosignRefusal::kNone},
      {"bad-log-signature", CosignRefusal::kBadLogSignature},
      {"inconsistent", CosignRefusal::kInconsistent},
      {"extra-entries", CosignRefusal::kExtraEntries},
      {"leaf-mismatch", CosignRefusal::kLeafMismatch},
      {"keyset-mismatch", CosignRefusal::kKeysetMismatch},
      {"clock-skew", CosignRefusal::kClockSkew},
      {"fetch-failed", CosignRefusal::kFetchFailed},
  };
  auto it = kByName.find(j.at("refusal").get<std::string>());
  if (it == kByName.end()) fail(ErrorCode::kDecode, "unknown cosign refusal");
  o.refusal = it->second;
  o.detail = j.value("detail", "");
  if (j.contains("cosignature") && !j["cosignature"].is_null()) {
    o.cosignature = j["cosignature"].get<Cosignature>();
  }
}

}  // namespace poa::ledger

namespace poa::merkle {

using nlohmann::json;

namespace {
json hashes_to_json(const std::vector<Digest32>& hashes) {
  json arr = json::array();
  for (const auto& h : hashes) arr.push_back(hex_encode(h));
  return arr;
}

std::vector<Digest32> hashes_from_json(const json& j) {
  std::vector<Digest32> out;
  for (const auto& h : j) out.push_back(digest_from_hex(h.get<std::string>()));
  return out;
}
}  // namespace

void to_json(json& j, const InclusionProof& p) {
  j = json{{"index", p.index}, {"tree_size", p.tree_size}, {"path", hashes_to_json(p.path)}};
}

void from_json(const json& j, InclusionProof& p) {
  p.index = j.at("index").get<uint64_t>();
  p.tree_size = j.at("tree_size").get<uint64_t>();
  p.path = hashes_from_json(j.at("path"));
}

void to_json(json& j, const ConsistencyProof& p) {
  j = json{{"old_size", p.old_size}, {"new_size", p.new_size}, {"path", hashes_to_json(p.path)}};
}

void from_json(const json& j, ConsistencyProof& p) {
  p.old_size = j.at("old_size").get<uint64_t>();
  p.new_size = j.at("new_size").get<uint64_t>();
  p.path = hashes_from_json(j.at("path"));
}

}  // namespace poa::merkle
