#include "poa/verifier/verifier.hpp"

#include <functional>

#include <nlohmann/json.hpp>

#include "poa/ca/ca_service.hpp"
#include "poa/common/error.hpp"
#include "poa/common/sha256.hpp"
#include "poa/gq/gq_pok.hpp"
#include "poa/jose/jose.hpp"
#include "poa/merkle/merkle.hpp"

namespace poa::verifier {
namespace {

constexpr const char* kSanOid = "2.5.29.17";

std::string_view inclusion_name(CtInclusion c) {
  switch (c) {
    case CtInclusion::kNotChecked: return "not-checked";
    case CtInclusion::kVerified: return "verified";
    case CtInclusion::kOffline: return "offline";
  }
  return "unknown";
}

// Working state threaded through the steps.
struct Context {
  const ca::Certificate* cert = nullptr;
  int64_t current_time = 0;
  jose::SignedContent content;
  jose::Jwks keys;
};

}  // namespace

std::string_view step_name(int step) {
  switch (step) {
    case 1: return "chain-and-sct";
    case 2: return "current-time";
    case 3: return "extract-token";
    case 4: return "validate-claims";
    case 5: return "ledger-keyset";
    case 6: return "proof";
    case 7: return "subject-fields";
  }
  return "unknown";
}

int VerificationReport::failed_step() const {
  for (const auto& s : steps) {
    if (!s.passed) return s.step;
  }
  return 0;
}

std::string VerificationReport::failure_reason() const {
  for (const auto& s : steps) {
    if (!s.passed) return s.reason;
  }
  return {};
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& s : steps) {
    steps_json.push_back({{"step", s.step},
                          {"name", step_name(s.step)},
                          {"status", s.passed ? "pass" : "fail"},
                          {"reason", s.reason}});
  }
  nlohmann::json j;
  j["verdict"] = accepted ? "accept" : "reject";
  j["current_time"] = current_time ? nlohmann::json(*current_time) : nlohmann::json(nullptr);
  j["ct_inclusion"] = inclusion_name(ct_inclusion);
  j["failed_step"] = failed_step();
  j["steps"] = std::move(steps_json);
  return j;
}

std::string VerificationReport::to_json_string() const {
  return to_json().dump(2) + "\n";
}

Verifier::Verifier(TrustRoots trust, std::shared_ptr<ledger::LedgerApi> ledger,
                   std::shared_ptr<ct::CtLogApi> ct)
    : trust_(std::move(trust)), ledger_(std::move(ledger)), ct_(std::move(ct)) {}

VerificationReport Verifier::verify(ByteView der) const {
  ca::Certificate cert;
  try {
    cert = ca::Certificate::from_der(der);
  } catch (const Error&) {
    VerificationReport r;
    r.steps.push_back({1, false, "malformed-certificate"});
    return r;
  }
  return verify(cert);
}

VerificationReport Verifier::verify(const ca::Certificate& cert) const {
  VerificationReport report;
  Context ctx;
  ctx.cert = &cert;
  const ca::PoaOids& oids = trust_.oids;

  // Each step returns an empty string on success or the failure reason.
  auto step1 = [&]() -> std::string {
    if (!cert.valid()) return "malformed-certificate";
    if (!cert.issued_by(trust_.ca_root)) return "issuer-not-trusted-root";
    const VerifyingKey ca_key = VerifyingKey::from_der(trust_.ca_root.subject_public_key());
    if (!cert.verify_signature(ca_key)) return "bad-ca-signature";
    const auto sct_bytes = cert.extension(oids.sct);
    if (!sct_bytes) return "malformed-certificate: missing SCT";
    ct::Sct sct;
    try {
      sct = ct::Sct::decode(*sct_bytes);
    } catch (const Error&) {
      return "malformed-certificate: bad SCT encoding";
    }
    const Digest32 tbs_hash = sha256(cert.tbs_without(oids.sct));
    if (!sct.verify(trust_.ct_key, tbs_hash)) return "bad-sct-signature";
    ctx.current_time = sct.timestamp_ms / 1000;
    if (sct.timestamp_ms < 0) return "bad-sct-timestamp";

    if (ct_) {
      ct::SignedTreeHead sth;
      try {
        sth = ct_->latest_tree_head();
      } catch (const std::exception&) {
        report.ct_inclusion = CtInclusion::kOffline;
        return {};
      }
      if (!trust_.ct_key.verify(sth.signed_bytes(), sth.log_signature)) return "bad-ct-tree-head";
      const Digest32 leaf = merkle::leaf_hash(ct::leaf_body(sct.timestamp_ms, tbs_hash));
      merkle::InclusionProof proof;
      try {
        proof = ct_->proof_by_hash(leaf, sth.tree_size);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNetwork) {
          report.ct_inclusion = CtInclusion::kOffline;
          return {};
        }
        return "sct-not-in-log";
      }
      if (!merkle::verify_inclusion(leaf, proof, sth.root)) return "ct-inclusion-failed";
      report.ct_inclusion = CtInclusion::kVerified;
    } else {
      report.ct_inclusion = CtInclusion::kOffline;
    }
    return {};
  };

  auto step2 = [&]() -> std::string {
    report.current_time = ctx.current_time;
    if (ctx.current_time < cert.not_before()) return "sct-before-not-before";
    if (ctx.current_time > cert.not_after()) return "sct-after-not-after";
    return {};
  };

  auto step3 = [&]() -> std::string {
    const auto input = cert.extension(oids.signing_input);
    if (!input) return "malformed-certificate: missing signing input";
    try {
      ctx.content = jose::parse_signing_input(to_string(*input));
    } catch (const Error& e) {
      return std::string("malformed-signing-input: ") + e.what();
    }
    return {};
  };

  auto step4 = [&]() -> std::string {
    jose::ClaimPolicy policy;
    policy.expected_iss = trust_.expected_issuer;
    policy.expected_aud = trust_.expected_ca_audience;
    policy.clock_skew = trust_.clock_skew;
    const jose::ClaimVerdict v = jose::validate_claims(ctx.content.claims, policy, ctx.current_time);
    if (v != jose::ClaimVerdict::kOk) return std::string(jose::to_string(v));
    return {};
  };

  auto step5 = [&]() -> std::string {
    if (!ledger_) return "ledger-unavailable";
    ledger::TimestampBracket bracket;
    try {
      bracket = ledger_->query_at(trust_.expected_issuer, ctx.current_time);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUnknownAtTime) return "unknown-at-time";
      return std::string("ledger-unavailable: ") + e.what();
    } catch (const std::exception& e) {
      return std::string("ledger-unavailable: ") + e.what();
    }
    const ledger::BracketVerdict bv =
        ledger::check_bracket(bracket, trust_.expected_issuer, ctx.current_time, trust_.quorum_policy());
    if (bv != ledger::BracketVerdict::kOk) return "bracket-" + std::string(ledger::to_string(bv));
    if (pinned_) {
      const ledger::SignedDigest& older =
          pinned_->tree_size <= bracket.digest.tree_size ? *pinned_ : bracket.digest;
      const ledger::SignedDigest& newer =
          pinned_->tree_size <= bracket.digest.tree_size ? bracket.digest : *pinned_;
      if (older.tree_size == 0) {
        // Nothing to compare against.
      } else if (older.tree_size == newer.tree_size) {
        if (older.root != newer.root) return "pinned-digest-inconsistent";
      } else {
        merkle::ConsistencyProof proof;
        try {
          proof = ledger_->prove_consistency(older.tree_size, newer.tree_size);
        } catch (const std::exception& e) {
          return std::string("pinned-digest-inconsistent: ") + e.what();
        }
        if (proof.old_size != older.tree_size || proof.new_size != newer.tree_size ||
            !merkle::verify_consistency(proof, older.root, newer.root)) {
          return "pinned-digest-inconsistent";
        }
      }
    }
    ctx.keys = bracket.before.entry.jwks;
    return {};
  };

  auto step6 = [&]() -> std::string {
    const auto wire = cert.extension(oids.proof);
    if (!wire) return "malformed-certificate: missing proof";
    gq::GqProof proof;
    try {
      proof = gq::GqProof::decode(*wire);
    } catch (const Error&) {
      return "proof-decode-error";
    }
    std::vector<const gq::RsaPublicKey*> candidates;
    if (!ctx.content.header.kid.empty()) {
      if (const auto* k = ctx.keys.find(ctx.content.header.kid)) candidates.push_back(k);
      if (candidates.empty()) return "key-not-found";
    } else {
      for (const auto& k : ctx.keys.keys) {
        if (candidates.size() == jose::kMaxKidFallbackKeys) break;
        candidates.push_back(&k);
      }
    }
    for (const auto* key : candidates) {
      try {
        if (gq::verify_proof(*key, as_bytes(ctx.content.signing_input), proof, trust_.lambda)) return {};
      } catch (const Error&) {
        // Degenerate key or statement: treat as a non-matching candidate.
      }
    }
    return "proof-invalid";
  };

  auto step7 = [&]() -> std::string {
    ca::SubjectFields expected;
    try {
      expected = ca::claim_map(ctx.content.claims, trust_.cert_lifetime);
    } catch (const Error&) {
      return "unmappable-claims";
    }
    const auto san = cert.extension(kSanOid);
    if (!san || *san != ca::encode_san(expected.san_type, expected.san_value)) return "san-mismatch";
    const auto iss = cert.extension(oids.issuer);
    if (!iss || to_string(*iss) != expected.issuer) return "issuer-extension-mismatch";
    if (cert.not_before() != expected.not_before || cert.not_after() != expected.not_after) {
      return "validity-mismatch";
    }
    return {};
  };

  const std::function<std::string()> steps[kStepCount] = {step1, step2, step3, step4,
                                                           step5, step6, step7};
  for (int i = 0; i < kStepCount; ++i) {
    std::string reason;
    try {
      reason = steps[i]();
    } catch (const Error& e) {
      reason = e.code() == ErrorCode::kMalformed ? std::string("malformed-certificate: ") + e.what()
                                                 : std::string(to_string(e.code())) + ": " + e.what();
    }
    report.steps.push_back({i + 1, reason.empty(), reason});
    if (!reason.empty()) return report;
  }
  report.accepted = true;
  return report;
}

}  // namespace poa::verifier
