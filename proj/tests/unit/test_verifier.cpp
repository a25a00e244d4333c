#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "poa/common/error.hpp"
#include "poa/gq/gq_pok.hpp"
#include "poa/verifier/games.hpp"
#include "poa/verifier/topology.hpp"
#include "poa/verifier/verifier.hpp"

using namespace poa;
using namespace poa::verifier;

namespace {

TopologyOptions toy(uint64_t seed = 1) {
  TopologyOptions o;
  o.seed = seed;
  return o;
}

struct Honest {
  explicit Honest(uint64_t seed = 1) : t(toy(seed)) {
    issued = t.request("alice@example.com");
    cert = ca::Certificate::from_der(issued.cert.der);
  }
  Topology t;
  Issued issued;
  ca::Certificate cert;
};

struct OfflineCt : ct::CtLogApi {
  ct::Sct submit_precert(ByteView) override { fail(ErrorCode::kNetwork, "offline"); }
  ct::SignedTreeHead latest_tree_head() override { fail(ErrorCode::kNetwork, "offline"); }
  merkle::InclusionProof prove_inclusion(uint64_t, uint64_t) override { fail(ErrorCode::kNetwork, "offline"); }
  merkle::InclusionProof proof_by_hash(const Digest32&, uint64_t) override {
    fail(ErrorCode::kNetwork, "offline");
  }
};

}  // namespace

TEST(Verifier, AcceptsHonestCertificate) {
  Honest h;
  const VerificationReport r = h.t.verifier().verify(h.cert);
  EXPECT_TRUE(r.accepted) << r.to_json_string();
  ASSERT_EQ(r.steps.size(), 7u);
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(r.steps[i].step, i + 1);
    EXPECT_TRUE(r.steps[i].passed);
    EXPECT_TRUE(r.steps[i].reason.empty());
  }
  EXPECT_EQ(r.failed_step(), 0);
  EXPECT_EQ(r.current_time, h.issued.cert.sct.timestamp_ms / 1000);
  EXPECT_EQ(r.ct_inclusion, CtInclusion::kVerified);
}

TEST(Verifier, ReportJsonShape) {
  Honest h;
  const nlohmann::json j = h.t.verifier().verify(h.cert).to_json();
  EXPECT_EQ(j.at("verdict"), "accept");
  EXPECT_EQ(j.at("failed_step"), 0);
  EXPECT_EQ(j.at("ct_inclusion"), "verified");
  ASSERT_EQ(j.at("steps").size(), 7u);
  EXPECT_EQ(j.at("steps")[5].at("name"), "proof");
  EXPECT_EQ(j.at("steps")[5].at("status"), "pass");
  const VerificationReport bad = h.t.verifier().verify(Bytes{0x30, 0x00});
  const nlohmann::json b = bad.to_json();
  EXPECT_EQ(b.at("verdict"), "reject");
  EXPECT_EQ(b.at("failed_step"), 1);
  EXPECT_TRUE(b.at("current_time").is_null());
  EXPECT_EQ(b.at("steps")[0].at("reason"), "malformed-certificate");
}

TEST(Verifier, TimeComesFromSctNotFromAnyClock) {
  Honest h;
  // Years later, past notAfter, on a poisoned local clock: same verdict.
  h.t.clock.advance(10LL * 365 * 86400);
  const VerificationReport r = h.t.verifier().verify(h.cert);
  EXPECT_TRUE(r.accepted) << r.to_json_string();
  EXPECT_EQ(r.current_time, h.issued.cert.sct.timestamp_ms / 1000);
}

TEST(Verifier, SurvivesRotations) {
  Honest h;
  for (int i = 0; i < 3; ++i) {
    h.t.clock.advance(60);
    h.t.rotate();
  }
  EXPECT_EQ(h.t.idp->rotation_counter(), 3u);
  EXPECT_TRUE(h.t.verifier().verify(h.cert).accepted);
}

TEST(Verifier, ZeroedProofFailsAtStepSix) {
  Honest h;
  ca::LeafContents c = contents_of(h.cert, h.t.trust, *h.t.rng);
  std::fill(c.proof->begin(), c.proof->end(), 0);
  const VerificationReport r = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r.failed_step(), 6) << r.to_json_string();
  // Zeroed values behind a valid header: the proof decodes and is wrong.
  c = contents_of(h.cert, h.t.trust, *h.t.rng);
  std::fill(c.proof->begin() + 5, c.proof->end() - 1 - static_cast<long>(h.issued.token.token.header.kid.size()), 0);
  const VerificationReport r2 = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r2.failed_step(), 6);
  EXPECT_EQ(r2.failure_reason(), "proof-invalid");
}

TEST(Verifier, MissingExtensionsAreMalformed) {
  Honest h;
  ca::LeafContents c = contents_of(h.cert, h.t.trust, *h.t.rng);
  c.proof.reset();
  VerificationReport r = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r.failed_step(), 6);
  EXPECT_EQ(r.failure_reason().rfind("malformed-certificate", 0), 0u) << r.failure_reason();
  c = contents_of(h.cert, h.t.trust, *h.t.rng);
  c.signing_input.reset();
  r = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r.failed_step(), 3);
  EXPECT_EQ(r.failure_reason().rfind("malformed-certificate", 0), 0u);
}

TEST(Verifier, RogueRootRejectedAtStepOne) {
  Honest h;
  Topology other(toy(2));
  const Issued rogue = other.request("alice@example.com");
  const VerificationReport r = h.t.verifier().verify(rogue.cert.der);
  EXPECT_EQ(r.failed_step(), 1);
  // Same CA name as the trusted root, so the name matches and the signature does not.
  EXPECT_EQ(r.failure_reason(), "bad-ca-signature");
  // Stops at the first failure.
  EXPECT_EQ(r.steps.size(), 1u);
}

TEST(Verifier, ForeignIssuerNameRejectedAtStepOne) {
  Honest h;
  TopologyOptions o = toy(2);
  o.ca_id = "other-ca";
  Topology other(o);
  const VerificationReport r = h.t.verifier().verify(other.request("alice@example.com").cert.der);
  EXPECT_EQ(r.failed_step(), 1);
  EXPECT_EQ(r.failure_reason(), "issuer-not-trusted-root");
}

TEST(Verifier, StolenCaKeyCannotTransplantProof) {
  Honest h;
  // Victim identity with a fabricated token; the honest proof is reused.
  const jose::SignedContent orig = jose::parse_signing_input(h.issued.token.token.signing_input);
  jose::OidcClaims claims = orig.claims;
  claims.sub = "victim@example.com";
  ca::LeafContents c = contents_of(h.cert, h.t.trust, *h.t.rng);
  c.signing_input = make_signing_input(orig.header, claims);
  c.fields = ca::claim_map(claims, h.t.trust.cert_lifetime);
  const VerificationReport r = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r.failed_step(), 6);
  EXPECT_EQ(r.failure_reason(), "proof-invalid");
}

TEST(Verifier, TokenForAnotherAudienceFailsAtClaims) {
  // A compromised CA holding a genuine token issued to some other relying
  // party can prove knowledge of its signature; the audience check stops it.
  Honest h;
  idp::TokenRequest req;
  req.sub = "alice@example.com";
  req.aud = "rp.example";
  const idp::IssuedToken tok = h.t.idp->issue_token(req, h.t.clock.now());
  const gq::RsaPublicKey pk = h.t.idp->signing_public_key();
  ca::LeafContents c = contents_of(h.cert, h.t.trust, *h.t.rng);
  c.signing_input = tok.token.signing_input;
  c.proof = gq::prove(pk, as_bytes(tok.token.signing_input), tok.token.signature, h.t.trust.lambda, *h.t.rng)
                .encode();
  c.fields = ca::claim_map(tok.token.claims, h.t.trust.cert_lifetime);
  const VerificationReport r = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r.failed_step(), 4);
  EXPECT_EQ(r.failure_reason(), "aud-mismatch");
}

TEST(Verifier, SubjectFieldsMustMatchClaims) {
  Honest h;
  ca::LeafContents c = contents_of(h.cert, h.t.trust, *h.t.rng);
  c.fields.san_value = "mallory@example.com";
  VerificationReport r = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r.failed_step(), 7);
  EXPECT_EQ(r.failure_reason(), "san-mismatch");
  c = contents_of(h.cert, h.t.trust, *h.t.rng);
  c.fields.not_after += 1;
  r = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r.failed_step(), 7);
  EXPECT_EQ(r.failure_reason(), "validity-mismatch");
  c = contents_of(h.cert, h.t.trust, *h.t.rng);
  c.fields.not_before = h.t.clock.now() + 100;
  c.fields.not_after = h.t.clock.now() + 700;
  r = h.t.verifier().verify(forge_certificate(h.t, c));
  EXPECT_EQ(r.failed_step(), 2);
  EXPECT_EQ(r.failure_reason(), "sct-before-not-before");
}

TEST(Verifier, SampledMutationsNeverAccept) {
  Honest h;
  const Verifier v = h.t.verifier();
  SeededRandom rng(77);
  const Bytes& der = h.issued.cert.der;
  for (int i = 0; i < 150; ++i) {
    Bytes m = der;
    const size_t pos = rng.uniform(m.size());
    m[pos] ^= static_cast<uint8_t>(1 + rng.uniform(255));
    const VerificationReport r = v.verify(m);
    ASSERT_FALSE(r.accepted) << "byte " << pos;
  }
}

TEST(Verifier, PinnedDigestDetectsRewrittenHistory) {
  // Two ledgers with the same keys and the same first entry, diverging at
  // the second: the one the verifier pinned and a rewritten one.
  Topology original(toy(7));
  original.clock.advance(100);
  original.rotate();
  const ledger::SignedDigest pinned = original.ledger->latest_digest();

  Honest rewritten(7);
  rewritten.t.clock.advance(200);
  rewritten.t.rotate();
  const Issued issued = rewritten.t.request("alice@example.com");
  ASSERT_EQ(rewritten.t.trust.ledger_key.der(), original.trust.ledger_key.der());

  Verifier v = rewritten.t.verifier();
  EXPECT_TRUE(v.verify(issued.cert.der).accepted);
  v.pin(pinned);
  const VerificationReport r = v.verify(issued.cert.der);
  EXPECT_EQ(r.failed_step(), 5);
  EXPECT_EQ(r.failure_reason().rfind("pinned-digest-inconsistent", 0), 0u) << r.failure_reason();

  // Pinning an honest earlier digest is fine.
  Verifier honest = rewritten.t.verifier();
  honest.pin(rewritten.t.ledger->latest_digest());
  EXPECT_TRUE(honest.verify(issued.cert.der).accepted);
}

TEST(Verifier, CtOfflineStillAccepts) {
  Honest h;
  const VerificationReport without = Verifier(h.t.trust, h.t.ledger).verify(h.cert);
  EXPECT_TRUE(without.accepted);
  EXPECT_EQ(without.ct_inclusion, CtInclusion::kOffline);
  const VerificationReport down = Verifier(h.t.trust, h.t.ledger, std::make_shared<OfflineCt>()).verify(h.cert);
  EXPECT_TRUE(down.accepted);
  EXPECT_EQ(down.ct_inclusion, CtInclusion::kOffline);
  EXPECT_EQ(down.to_json().at("ct_inclusion"), "offline");
}

TEST(Verifier, UnloggedCertificateFailsInclusion) {
  Honest h;
  // A log that never saw the certificate.
  Topology other(toy(1));
  ASSERT_EQ(other.trust.ct_key.der(), h.t.trust.ct_key.der());
  const VerificationReport r = Verifier(h.t.trust, h.t.ledger, other.ct).verify(h.cert);
  EXPECT_EQ(r.failed_step(), 1);
  EXPECT_EQ(r.failure_reason(), "sct-not-in-log");
}

TEST(Verifier, NoLedgerMeansNoAcceptance) {
  Honest h;
  const VerificationReport r = Verifier(h.t.trust, nullptr, h.t.ct).verify(h.cert);
  EXPECT_EQ(r.failed_step(), 5);
}

TEST(Verifier, ReportsAreDeterministic) {
  Honest a(5), b(5);
  EXPECT_EQ(a.t.verifier().verify(a.cert).to_json_string(), b.t.verifier().verify(b.cert).to_json_string());
}

TEST(TrustRoots, JsonRoundTripAndValidation) {
  Topology t(toy());
  const std::string json = t.trust.to_json();
  const TrustRoots back = TrustRoots::from_json(json);
  EXPECT_EQ(back.to_json(), json);
  EXPECT_EQ(back.quorum, 2u);
  EXPECT_EQ(back.witness_keys.size(), 3u);
  TrustRoots bad = back;
  bad.quorum = 4;
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_THROW(TrustRoots::from_json("{}"), Error);
  EXPECT_THROW(TrustRoots::from_json("not json"), Error);
}
