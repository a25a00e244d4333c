#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "../support/oracles.hpp"
#include "poa/ca/x509.hpp"
#include "poa/common/error.hpp"
#include "poa/common/random.hpp"
#include "poa/common/sha256.hpp"
#include "poa/ct/ct_log.hpp"

using namespace poa;

namespace {

struct CtFixture : ::testing::Test {
  CtFixture() : rng(4), key(SigningKey::generate_ed25519(rng)), log(key, [this] { return now_ms; }) {
    const SigningKey ca = SigningKey::generate_p256();
    tbs_a = ca::tbs_bytes(ca::make_root(ca, 1700000000, 3600));
    tbs_b = ca::tbs_bytes(ca::make_root(ca, 1700000001, 3600));
  }

  SeededRandom rng;
  SigningKey key;
  int64_t now_ms = 1700000000123;
  ct::CtLog log;
  Bytes tbs_a;
  Bytes tbs_b;
};

}  // namespace

TEST_F(CtFixture, SctSignsLogIdTimestampAndTbsHash) {
  const ct::Sct sct = log.submit_precert(tbs_a);
  EXPECT_EQ(sct.log_id, key.public_key().key_id());
  EXPECT_EQ(sct.timestamp_ms, now_ms);
  Bytes expect;
  append(expect, sct.log_id);
  append_u64_be(expect, static_cast<uint64_t>(now_ms));
  append(expect, oracle::sha256(tbs_a));
  EXPECT_EQ(ct::Sct::signed_bytes(sct.log_id, now_ms, sha256(tbs_a)), expect);
  EXPECT_TRUE(key.public_key().verify(expect, sct.signature));
  EXPECT_TRUE(sct.verify(key.public_key(), sha256(tbs_a)));
  EXPECT_FALSE(sct.verify(key.public_key(), sha256(tbs_b)));
  ct::Sct moved = sct;
  moved.timestamp_ms += 1;
  EXPECT_FALSE(moved.verify(key.public_key(), sha256(tbs_a)));
  SeededRandom other(5);
  EXPECT_FALSE(sct.verify(SigningKey::generate_ed25519(other).public_key(), sha256(tbs_a)));
}

TEST_F(CtFixture, SctWireLayout) {
  const ct::Sct sct = log.submit_precert(tbs_a);
  const Bytes wire = sct.encode();
  ASSERT_EQ(wire.size(), 32u + 8u + 2u + sct.signature.size());
  EXPECT_TRUE(std::equal(sct.log_id.begin(), sct.log_id.end(), wire.begin()));
  EXPECT_EQ(read_u64_be(wire, 32), static_cast<uint64_t>(now_ms));
  EXPECT_EQ((static_cast<size_t>(wire[40]) << 8) | wire[41], sct.signature.size());
  EXPECT_EQ(ct::Sct::decode(wire), sct);
  for (size_t cut : {size_t{0}, size_t{41}, wire.size() - 1}) {
    EXPECT_THROW(ct::Sct::decode(ByteView(wire).first(cut)), Error);
  }
  Bytes longer = wire;
  longer.push_back(0);
  EXPECT_THROW(ct::Sct::decode(longer), Error);
  const nlohmann::json j = sct;
  EXPECT_EQ(j.get<ct::Sct>(), sct);
}

TEST_F(CtFixture, RejectsNonTbsInput) {
  EXPECT_THROW(
      {
        try {
          log.submit_precert(to_bytes("not a certificate"));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kMalformed);
          throw;
        }
      },
      Error);
  Bytes trailing = tbs_a;
  trailing.push_back(0);
  EXPECT_THROW(log.submit_precert(trailing), Error);
  EXPECT_EQ(log.size(), 0u);
}

TEST_F(CtFixture, LeavesAreProvableAgainstSignedTreeHeads) {
  std::vector<ct::Sct> scts;
  std::vector<Bytes> bodies;
  for (int i = 0; i < 9; ++i) {
    now_ms += 1000;
    const Bytes& tbs = i % 2 ? tbs_a : tbs_b;
    scts.push_back(log.submit_precert(tbs));
    bodies.push_back(ct::leaf_body(now_ms, sha256(tbs)));
  }
  EXPECT_EQ(log.size(), 9u);
  const ct::SignedTreeHead sth = log.latest_tree_head();
  EXPECT_EQ(sth.timestamp, now_ms);
  EXPECT_EQ(sth.root, oracle::mth(bodies));
  EXPECT_TRUE(key.public_key().verify(sth.signed_bytes(), sth.log_signature));
  for (size_t i = 0; i < bodies.size(); ++i) {
    const Digest32 leaf = merkle::leaf_hash(bodies[i]);
    const merkle::InclusionProof p = log.proof_by_hash(leaf, sth.tree_size);
    EXPECT_EQ(p.index, i);
    EXPECT_TRUE(merkle::verify_inclusion(leaf, p, sth.root));
  }
  EXPECT_THROW(log.proof_by_hash(merkle::leaf_hash(to_bytes("x")), sth.tree_size), Error);
  // A leaf appended after the requested size is not provable at that size.
  EXPECT_THROW(log.proof_by_hash(merkle::leaf_hash(bodies.back()), 8), Error);
}

TEST_F(CtFixture, IdenticalPrecertsAreNotDeduplicated) {
  log.submit_precert(tbs_a);
  log.submit_precert(tbs_a);
  EXPECT_EQ(log.size(), 2u);
}
