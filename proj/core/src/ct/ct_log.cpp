#include "poa/ct/ct_log.hpp"

#include <mutex>

#include <nlohmann/json.hpp>
#include <openssl/x509.h>

#include "poa/common/error.hpp"
#include "poa/common/sha256.hpp"

namespace poa::ct {

Bytes Sct::signed_bytes(const Digest32& log_id, int64_t timestamp_ms, const Digest32& tbs_hash) {
  Bytes out;
  append(out, log_id);
  append_u64_be(out, static_cast<uint64_t>(timestamp_ms));
  append(out, tbs_hash);
  return out;
}

bool Sct::verify(const VerifyingKey& ct_key, const Digest32& tbs_hash) const {
  if (log_id != ct_key.key_id()) return false;
  return ct_key.verify(signed_bytes(log_id, timestamp_ms, tbs_hash), signature);
}

Bytes Sct::encode() const {
  Bytes out;
  append(out, log_id);
  append_u64_be(out, static_cast<uint64_t>(timestamp_ms));
  append_u16_be(out, static_cast<uint16_t>(signature.size()));
  append(out, signature);
  return out;
}

Sct Sct::decode(ByteView wire) {
  if (wire.size() < 42) fail(ErrorCode::kDecode, "truncated SCT");
  Sct s;
  std::copy(wire.begin(), wire.begin() + 32, s.log_id.begin());
  s.timestamp_ms = static_cast<int64_t>(read_u64_be(wire, 32));
  const size_t len = static_cast<size_t>(wire[40]) << 8 | wire[41];
  if (wire.size() != 42 + len) fail(ErrorCode::kDecode, "SCT length mismatch");
  s.signature.assign(wire.begin() + 42, wire.end());
  return s;
}

Bytes leaf_body(int64_t timestamp_ms, const Digest32& tbs_hash) {
  Bytes out;
  append_u64_be(out, static_cast<uint64_t>(timestamp_ms));
  append(out, tbs_hash);
  return out;
}

bool is_tbs_certificate(ByteView der) {
  const unsigned char* p = der.data();
  X509_CINF* cinf = d2i_X509_CINF(nullptr, &p, static_cast<long>(der.size()));
  const bool ok = cinf != nullptr && p == der.data() + der.size();
  X509_CINF_free(cinf);
  return ok;
}

CtLog::CtLog(SigningKey key, MillisClock clock_ms)
    : key_(std::move(key)), log_id_(key_.public_key().key_id()), clock_ms_(std::move(clock_ms)) {}

Sct CtLog::submit_precert(ByteView tbs_der, int64_t now_ms) {
  if (!is_tbs_certificate(tbs_der)) fail(ErrorCode::kMalformed, "not a TBSCertificate");
  const Digest32 tbs_hash = sha256(tbs_der);
  Sct sct;
  sct.log_id = log_id_;
  sct.timestamp_ms = now_ms;
  sct.signature = key_.sign(Sct::signed_bytes(log_id_, now_ms, tbs_hash));
  const Digest32 leaf = merkle::leaf_hash(leaf_body(now_ms, tbs_hash));
  std::unique_lock lock(mu_);
  first_index_.emplace(leaf, tree_.size());
  tree_.append(leaf);
  return sct;
}

SignedTreeHead CtLog::tree_head(int64_t now_ms) {
  std::shared_lock lock(mu_);
  SignedTreeHead sth;
  sth.tree_size = tree_.size();
  sth.root = tree_.root();
  sth.timestamp = now_ms;
  sth.log_signature = key_.sign(sth.signed_bytes());
  return sth;
}

uint64_t CtLog::size() const {
  std::shared_lock lock(mu_);
  return tree_.size();
}

Sct CtLog::submit_precert(ByteView tbs_der) {
  return submit_precert(tbs_der, clock_ms_());
}

SignedTreeHead CtLog::latest_tree_head() {
  return tree_head(clock_ms_());
}

merkle::InclusionProof CtLog::prove_inclusion(uint64_t index, uint64_t tree_size) {
  std::shared_lock lock(mu_);
  return tree_.prove_inclusion(index, tree_size);
}

merkle::InclusionProof CtLog::proof_by_hash(const Digest32& leaf_hash, uint64_t tree_size) {
  std::shared_lock lock(mu_);
  auto it = first_index_.find(leaf_hash);
  if (it == first_index_.end() || it->second >= tree_size) {
    fail(ErrorCode::kNotFound, "leaf not in log at that size");
  }
  return tree_.prove_inclusion(it->second, tree_size);
}

void to_json(nlohmann::json& j, const Sct& s) {
  j = nlohmann::json{{"log_id", hex_encode(s.log_id)},
                     {"timestamp", s.timestamp_ms},
                     {"signature", base64_encode(s.signature)}};
}

void from_json(const nlohmann::json& j, Sct& s) {
  s.log_id = digest_from_hex(j.at("log_id").get<std::string>());
  s.timestamp_ms = j.at("timestamp").get<int64_t>();
  s.signature = base64_decode(j.at("signature").get<std::string>());
}

}  // namespace poa::ct
