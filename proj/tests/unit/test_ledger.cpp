#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "../support/fakes.hpp"
#include "../support/oracles.hpp"
#include "poa/common/clock.hpp"
#include "poa/common/error.hpp"
#include "poa/common/random.hpp"
#include "poa/ledger/jwk_ledger.hpp"

using namespace poa;
using namespace poa::ledger;

namespace {

const std::string kIssA = "https://a.example";
const std::string kIssB = "https://b.example";

struct World {
  explicit World(unsigned witnesses = 3, unsigned quorum = 2, uint64_t seed = 1, int64_t start = 1000)
      : rng(seed),
        clock(start),
        source(std::make_shared<fakes::MapSource>()),
        log_key(SigningKey::generate_ed25519(rng)),
        ledger(log_key, clock.as_clock()) {
    policy.log_key = log_key.public_key();
    policy.quorum = quorum;
    for (unsigned i = 0; i < witnesses; ++i) {
      const std::string id = "w" + std::to_string(i);
      auto w = std::make_shared<Witness>(id, SigningKey::generate_ed25519(rng), log_key.public_key(),
                                         source, clock.as_clock());
      policy.witnesses[id] = w->public_key();
      ledger.add_witness(w);
      ws.push_back(w);
    }
  }

  AppendResult publish(const std::string& issuer, const jose::Jwks& keys) {
    source->set(issuer, keys);
    return ledger.append(issuer, keys);
  }

  SeededRandom rng;
  ManualClock clock;
  std::shared_ptr<fakes::MapSource> source;
  SigningKey log_key;
  JwkLedger ledger;
  std::vector<std::shared_ptr<Witness>> ws;
  QuorumPolicy policy;
};

Bytes body_oracle(const std::string& issuer, int64_t recorded_at, const jose::Jwks& jwks) {
  Bytes b;
  append_u32_be(b, static_cast<uint32_t>(issuer.size()));
  append(b, as_bytes(issuer));
  append_u64_be(b, static_cast<uint64_t>(recorded_at));
  const std::string doc = jwks.to_json();
  append_u32_be(b, static_cast<uint32_t>(doc.size()));
  append(b, as_bytes(doc));
  return b;
}

}  // namespace

TEST(Ledger, SingleLeafRootAndDigestLayout) {
  World w;
  const AppendResult r = w.publish(kIssA, fakes::keyset(1));
  EXPECT_FALSE(r.duplicate);
  EXPECT_EQ(r.entry.body(), body_oracle(kIssA, 1000, fakes::keyset(1)));
  EXPECT_EQ(r.digest.root, oracle::mth({r.entry.body()}));
  EXPECT_EQ(r.digest.tree_size, 1u);
  Bytes expect;
  append_u64_be(expect, 1);
  append(expect, r.digest.root);
  append_u64_be(expect, 1000);
  EXPECT_EQ(r.digest.signed_bytes(), expect);
  EXPECT_TRUE(w.log_key.public_key().verify(expect, r.digest.log_signature));
  EXPECT_EQ(r.digest.cosignatures.size(), 3u);
  EXPECT_TRUE(client_check_quorum(r.digest, w.policy).accepted);
}

TEST(Ledger, DuplicateSnapshotIsNoOp) {
  World w;
  w.publish(kIssA, fakes::keyset(1));
  w.clock.advance(10);
  const AppendResult again = w.publish(kIssA, fakes::keyset(1));
  EXPECT_TRUE(again.duplicate);
  EXPECT_EQ(w.ledger.size(), 1u);
  // Same keys for another issuer are a new entry.
  EXPECT_FALSE(w.publish(kIssB, fakes::keyset(1)).duplicate);
  // Reverting to an older key set is a change too.
  w.publish(kIssA, fakes::keyset(2));
  EXPECT_FALSE(w.publish(kIssA, fakes::keyset(1)).duplicate);
  EXPECT_EQ(w.ledger.size(), 4u);
}

TEST(Ledger, AppendRejectedWhenSourceDisagrees) {
  World w;
  w.ledger.set_jwks_source(w.source);
  w.source->set(kIssA, fakes::keyset(1));
  EXPECT_THROW(
      {
        try {
          w.ledger.append(kIssA, fakes::keyset(2));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kKeysetMismatch);
          throw;
        }
      },
      Error);
  EXPECT_EQ(w.ledger.size(), 0u);
}

TEST(Ledger, RecordedAtNeverGoesBackwards) {
  World w;
  w.publish(kIssA, fakes::keyset(1));
  w.clock.set(900);
  const AppendResult r = w.publish(kIssA, fakes::keyset(2));
  EXPECT_EQ(r.entry.recorded_at, 1000);
}

TEST(Quorum, CountsDistinctConfiguredWitnesses) {
  World w;
  const SignedDigest d = w.publish(kIssA, fakes::keyset(1)).digest;
  ASSERT_EQ(d.cosignatures.size(), 3u);

  SignedDigest two = d;
  two.cosignatures.resize(2);
  EXPECT_TRUE(client_check_quorum(two, w.policy).accepted);

  SignedDigest one = d;
  one.cosignatures.resize(1);
  EXPECT_FALSE(client_check_quorum(one, w.policy).accepted);

  SignedDigest dup = d;
  dup.cosignatures = {d.cosignatures[0], d.cosignatures[0], d.cosignatures[0]};
  const QuorumResult qr = client_check_quorum(dup, w.policy);
  EXPECT_FALSE(qr.accepted);
  EXPECT_EQ(qr.valid_cosignatures, 1u);

  // A cosignature from a key outside the policy does not count.
  SigningKey rogue = SigningKey::generate_ed25519(w.rng);
  SignedDigest unknown = one;
  unknown.cosignatures.push_back({"w9", rogue.sign(d.signed_bytes())});
  EXPECT_FALSE(client_check_quorum(unknown, w.policy).accepted);
  // Nor does a configured id signed with the wrong key.
  SignedDigest impostor = one;
  impostor.cosignatures.push_back({"w1", rogue.sign(d.signed_bytes())});
  EXPECT_FALSE(client_check_quorum(impostor, w.policy).accepted);

  SignedDigest bad_log = d;
  bad_log.log_signature[3] ^= 1;
  EXPECT_FALSE(client_check_quorum(bad_log, w.policy).accepted);
  EXPECT_FALSE(client_check_quorum(bad_log, w.policy).log_signature_valid);

  SignedDigest moved = d;
  moved.timestamp += 1;
  EXPECT_FALSE(client_check_quorum(moved, w.policy).accepted);
}

TEST(Quorum, DownWitnessStillReachesQuorum) {
  World w;
  w.source->set(kIssA, fakes::keyset(1));
  // w2 sees a different key set and refuses.
  auto other = std::make_shared<fakes::MapSource>();
  other->set(kIssA, fakes::keyset(7));
  auto liar = std::make_shared<Witness>("w2", SigningKey::generate_ed25519(w.rng),
                                        w.log_key.public_key(), other, w.clock.as_clock());
  JwkLedger ledger(w.log_key, w.clock.as_clock());
  ledger.add_witness(w.ws[0]);
  ledger.add_witness(w.ws[1]);
  ledger.add_witness(liar);
  QuorumPolicy policy = w.policy;
  policy.witnesses["w2"] = liar->public_key();
  const SignedDigest d = ledger.append(kIssA, fakes::keyset(1)).digest;
  EXPECT_EQ(d.cosignatures.size(), 2u);
  EXPECT_TRUE(client_check_quorum(d, policy).accepted);
  policy.quorum = 3;
  EXPECT_FALSE(client_check_quorum(d, policy).accepted);
}

class WitnessChecks : public ::testing::Test {
 protected:
  WitnessChecks() : rng(5), clock(1000), source(std::make_shared<fakes::MapSource>()) {
    log_key = SigningKey::generate_ed25519(rng);
    // An unwitnessed ledger produces the updates; the witness under test is
    // driven by hand.
    ledger = std::make_unique<JwkLedger>(log_key, clock.as_clock());
    witness = std::make_unique<Witness>("w", SigningKey::generate_ed25519(rng), log_key.public_key(),
                                        source, clock.as_clock());
  }

  CosignRequest request_for(const AppendResult& r, uint64_t from) {
    CosignRequest req;
    req.proposed = r.digest;
    req.delta = r.entry;
    req.delta_inclusion = ledger->prove_inclusion(r.entry.index, r.digest.tree_size);
    req.consistency.old_size = from;
    req.consistency.new_size = r.digest.tree_size;
    if (from > 0) req.consistency = ledger->prove_consistency(from, r.digest.tree_size);
    return req;
  }

  AppendResult add(const std::string& issuer, int tag) {
    source->set(issuer, fakes::keyset(tag));
    return ledger->append(issuer, fakes::keyset(tag));
  }

  SeededRandom rng;
  ManualClock clock;
  std::shared_ptr<fakes::MapSource> source;
  SigningKey log_key;
  std::unique_ptr<JwkLedger> ledger;
  std::unique_ptr<Witness> witness;
};

TEST_F(WitnessChecks, AcceptsHonestSequence) {
  const AppendResult a = add(kIssA, 1);
  const CosignOutcome o1 = witness->cosign(request_for(a, 0));
  ASSERT_TRUE(o1.cosignature) << o1.detail;
  EXPECT_TRUE(witness->public_key().verify(a.digest.signed_bytes(), o1.cosignature->signature));
  clock.advance(5);
  const AppendResult b = add(kIssB, 2);
  const CosignOutcome o2 = witness->cosign(request_for(b, 1));
  ASSERT_TRUE(o2.cosignature) << o2.detail;
  EXPECT_EQ(witness->last_cosigned()->tree_size, 2u);
  // Refresh: same tree, newer timestamp, no delta.
  clock.advance(5);
  const SignedDigest fresh = ledger->refresh(clock.now());
  CosignRequest rr;
  rr.proposed = fresh;
  rr.consistency = ledger->prove_consistency(2, 2);
  EXPECT_TRUE(witness->cosign(rr).cosignature);
}

TEST_F(WitnessChecks, RefusesBadLogSignature) {
  CosignRequest req = request_for(add(kIssA, 1), 0);
  req.proposed.log_signature[0] ^= 1;
  EXPECT_EQ(witness->cosign(req).refusal, CosignRefusal::kBadLogSignature);
}

TEST_F(WitnessChecks, RefusesExtraEntries) {
  add(kIssA, 1);
  const AppendResult second = add(kIssB, 2);
  EXPECT_EQ(witness->cosign(request_for(second, 0)).refusal, CosignRefusal::kExtraEntries);
  CosignRequest no_delta = request_for(second, 0);
  no_delta.delta.reset();
  no_delta.delta_inclusion.reset();
  EXPECT_EQ(witness->cosign(no_delta).refusal, CosignRefusal::kExtraEntries);
  EXPECT_FALSE(witness->last_cosigned());
}

TEST_F(WitnessChecks, RefusesKeysetMismatch) {
  const AppendResult a = add(kIssA, 1);
  source->set(kIssA, fakes::keyset(99));
  EXPECT_EQ(witness->cosign(request_for(a, 0)).refusal, CosignRefusal::kKeysetMismatch);
}

TEST_F(WitnessChecks, RefusesWhenFetchFails) {
  const AppendResult a = add(kIssA, 1);
  auto empty = std::make_shared<fakes::MapSource>();
  Witness blind("b", SigningKey::generate_ed25519(rng), log_key.public_key(), empty, clock.as_clock());
  EXPECT_EQ(blind.cosign(request_for(a, 0)).refusal, CosignRefusal::kFetchFailed);
}

TEST_F(WitnessChecks, RefusesClockSkew) {
  const AppendResult a = add(kIssA, 1);
  EXPECT_EQ(witness->cosign(request_for(a, 0), 1000 + 121).refusal, CosignRefusal::kClockSkew);
  EXPECT_EQ(witness->cosign(request_for(a, 0), 1000 - 121).refusal, CosignRefusal::kClockSkew);
  EXPECT_TRUE(witness->cosign(request_for(a, 0), 1000 + 120).cosignature);
}

TEST_F(WitnessChecks, RefusesTamperedDelta) {
  const AppendResult a = add(kIssA, 1);
  CosignRequest req = request_for(a, 0);
  req.delta->jwks = fakes::keyset(3);
  EXPECT_EQ(witness->cosign(req).refusal, CosignRefusal::kLeafMismatch);
  req = request_for(a, 0);
  req.delta->jwks = fakes::keyset(3);
  req.delta->leaf_hash = req.delta->compute_leaf_hash();
  EXPECT_EQ(witness->cosign(req).refusal, CosignRefusal::kLeafMismatch);
}

TEST_F(WitnessChecks, RefusesForkedHistory) {
  const AppendResult a = add(kIssA, 1);
  ASSERT_TRUE(witness->cosign(request_for(a, 0)).cosignature);
  // A second log with the same key but a different first entry.
  JwkLedger fork(log_key, clock.as_clock());
  source->set(kIssA, fakes::keyset(4));
  fork.append(kIssA, fakes::keyset(4));
  source->set(kIssB, fakes::keyset(5));
  const AppendResult f2 = fork.append(kIssB, fakes::keyset(5));
  CosignRequest req;
  req.proposed = f2.digest;
  req.delta = f2.entry;
  req.delta_inclusion = fork.prove_inclusion(1, 2);
  req.consistency = fork.prove_consistency(1, 2);
  EXPECT_EQ(witness->cosign(req).refusal, CosignRefusal::kInconsistent);
  // Proof starting from the wrong size is refused as well.
  const AppendResult b = add(kIssB, 5);
  CosignRequest wrong = request_for(b, 0);
  EXPECT_EQ(witness->cosign(wrong).refusal, CosignRefusal::kInconsistent);
  EXPECT_TRUE(witness->cosign(request_for(b, 1)).cosignature);
}

TEST_F(WitnessChecks, RefusesTimestampRollback) {
  const AppendResult a = add(kIssA, 1);
  clock.advance(50);
  const SignedDigest later = ledger->refresh(clock.now());
  CosignRequest first = request_for(a, 0);
  ASSERT_TRUE(witness->cosign(first).cosignature);
  CosignRequest fresh;
  fresh.proposed = later;
  fresh.consistency = ledger->prove_consistency(1, 1);
  ASSERT_TRUE(witness->cosign(fresh).cosignature);
  CosignRequest old;
  old.proposed = a.digest;
  old.consistency = ledger->prove_consistency(1, 1);
  EXPECT_EQ(witness->cosign(old).refusal, CosignRefusal::kClockSkew);
}

TEST(Bracket, ClosedOpenAndUnknown) {
  World w(3, 2, 1, 100);
  w.clock.set(100);
  const AppendResult k1 = w.publish(kIssA, fakes::keyset(1));
  w.clock.set(200);
  const AppendResult k2 = w.publish(kIssA, fakes::keyset(2));

  const TimestampBracket closed = w.ledger.query_at(kIssA, 150, 300);
  EXPECT_EQ(closed.before.entry.index, k1.entry.index);
  ASSERT_TRUE(closed.after);
  EXPECT_EQ(closed.after->entry.index, k2.entry.index);
  EXPECT_EQ(check_bracket(closed, kIssA, 150, w.policy), BracketVerdict::kOk);

  // Boundary: an entry recorded exactly at t is "before".
  EXPECT_EQ(w.ledger.query_at(kIssA, 200, 300).before.entry.index, k2.entry.index);
  EXPECT_EQ(w.ledger.query_at(kIssA, 199, 300).before.entry.index, k1.entry.index);

  w.clock.set(300);
  const TimestampBracket open = w.ledger.query_at(kIssA, 250, 300);
  EXPECT_EQ(open.before.entry.index, k2.entry.index);
  EXPECT_FALSE(open.after);
  EXPECT_GE(open.digest.timestamp, 250);
  EXPECT_EQ(check_bracket(open, kIssA, 250, w.policy), BracketVerdict::kOk);

  EXPECT_THROW(
      {
        try {
          w.ledger.query_at(kIssA, 50, 300);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kUnknownAtTime);
          throw;
        }
      },
      Error);
  EXPECT_THROW(
      {
        try {
          w.ledger.query_at(kIssA, 400, 300);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kDigestNotFresh);
          throw;
        }
      },
      Error);
  EXPECT_THROW(w.ledger.query_at(kIssB, 250, 300), Error);
}

TEST(Bracket, InterleavedIssuersShipIntermediateEntries) {
  World w(3, 2, 1, 100);
  w.clock.set(100);
  w.publish(kIssA, fakes::keyset(1));
  w.clock.set(110);
  w.publish(kIssB, fakes::keyset(2));
  w.clock.set(120);
  w.publish(kIssB, fakes::keyset(3));
  w.clock.set(130);
  w.publish(kIssA, fakes::keyset(4));
  const TimestampBracket b = w.ledger.query_at(kIssA, 125, 200);
  EXPECT_EQ(b.before.entry.index, 0u);
  ASSERT_EQ(b.between.size(), 2u);
  EXPECT_EQ(b.after->entry.index, 3u);
  EXPECT_EQ(check_bracket(b, kIssA, 125, w.policy), BracketVerdict::kOk);

  TimestampBracket hidden = b;
  hidden.between.erase(hidden.between.begin());
  EXPECT_EQ(check_bracket(hidden, kIssA, 125, w.policy), BracketVerdict::kNotAdjacent);
}

TEST(Bracket, TamperingIsDetected) {
  World w(3, 2, 1, 100);
  w.clock.set(100);
  w.publish(kIssA, fakes::keyset(1));
  w.clock.set(200);
  w.publish(kIssB, fakes::keyset(5));
  w.clock.set(300);
  w.publish(kIssA, fakes::keyset(2));
  w.clock.set(400);
  w.publish(kIssA, fakes::keyset(3));
  const TimestampBracket good = w.ledger.query_at(kIssA, 150, 500);
  ASSERT_EQ(check_bracket(good, kIssA, 150, w.policy), BracketVerdict::kOk);

  auto verdict = [&](auto mutate, int64_t t = 150) {
    TimestampBracket b = good;
    mutate(b);
    return check_bracket(b, kIssA, t, w.policy);
  };
  EXPECT_EQ(verdict([](TimestampBracket& b) { b.before.entry.jwks = fakes::keyset(9); }),
            BracketVerdict::kLeafHash);
  EXPECT_EQ(verdict([](TimestampBracket& b) {
              b.before.entry.jwks = fakes::keyset(9);
              b.before.entry.leaf_hash = b.before.entry.compute_leaf_hash();
            }),
            BracketVerdict::kInclusion);
  EXPECT_EQ(verdict([](TimestampBracket& b) { b.before.proof.path[0][0] ^= 1; }),
            BracketVerdict::kInclusion);
  EXPECT_EQ(verdict([](TimestampBracket& b) { b.digest.cosignatures.resize(1); }),
            BracketVerdict::kQuorum);
  EXPECT_EQ(verdict([](TimestampBracket& b) { b.digest.root[0] ^= 1; }), BracketVerdict::kQuorum);
  EXPECT_EQ(verdict([](TimestampBracket&) {}, 50), BracketVerdict::kBeforeAfterQuery);
  EXPECT_EQ(verdict([](TimestampBracket&) {}, 350), BracketVerdict::kAfterNotAfterQuery);
  EXPECT_EQ(verdict([](TimestampBracket& b) { b.after.reset(); }), BracketVerdict::kNotAdjacent);
  EXPECT_EQ(verdict([](TimestampBracket& b) { std::swap(b.before, *b.after); }),
            BracketVerdict::kBeforeAfterQuery);
  // Claiming a later key set for the earlier time: skip entry 2 and present
  // entry 3 as the successor.
  const TimestampBracket later = w.ledger.query_at(kIssA, 350, 500);
  EXPECT_EQ(verdict([&](TimestampBracket& b) { b.after = later.after; }),
            BracketVerdict::kNotAdjacent);
  EXPECT_NE(check_bracket(good, kIssB, 150, w.policy), BracketVerdict::kOk);
}

TEST(Bracket, JsonRoundTrip) {
  World w;
  w.publish(kIssA, fakes::keyset(1));
  w.clock.advance(10);
  w.publish(kIssA, fakes::keyset(2, 2));
  const TimestampBracket b = w.ledger.query_at(kIssA, 1005, 1010);
  const nlohmann::json j = b;
  const TimestampBracket back = j.get<TimestampBracket>();
  EXPECT_EQ(check_bracket(back, kIssA, 1005, w.policy), BracketVerdict::kOk);
  EXPECT_EQ(nlohmann::json(back), j);
}

// Random interleavings of appends and queries for several issuers, checked
// against a linear scan over the append log.
TEST(Bracket, RandomSchedulesMatchLinearScan) {
  for (uint64_t schedule = 0; schedule < 20; ++schedule) {
    World w(3, 2, 100 + schedule);
    SeededRandom r(schedule);
    struct Rec {
      std::string issuer;
      int64_t at;
    };
    std::vector<Rec> log;
    const std::vector<std::string> issuers = {kIssA, kIssB, "https://c.example"};
    std::map<std::string, int> tag;
    int64_t now = 1000;
    for (int step = 0; step < 40; ++step) {
      now += static_cast<int64_t>(r.uniform(30));
      w.clock.set(now);
      const std::string& iss = issuers[r.uniform(issuers.size())];
      const int t = ++tag[iss] + 100 * static_cast<int>(&iss - issuers.data());
      const AppendResult res = w.publish(iss, fakes::keyset(t));
      ASSERT_FALSE(res.duplicate);
      log.push_back({iss, res.entry.recorded_at});
    }
    for (int q = 0; q < 60; ++q) {
      const std::string& iss = issuers[r.uniform(issuers.size())];
      const int64_t t = 990 + static_cast<int64_t>(r.uniform(static_cast<uint64_t>(now - 990 + 20)));
      std::optional<size_t> before, after;
      for (size_t i = 0; i < log.size(); ++i) {
        if (log[i].issuer != iss) continue;
        if (log[i].at <= t) {
          before = i;
        } else if (!after) {
          after = i;
        }
      }
      const int64_t query_now = std::max(now, t);
      if (!before) {
        EXPECT_THROW(w.ledger.query_at(iss, t, query_now), Error);
        continue;
      }
      w.clock.set(query_now);
      const TimestampBracket b = w.ledger.query_at(iss, t, query_now);
      ASSERT_EQ(b.before.entry.index, *before) << schedule << " " << iss << " t=" << t;
      ASSERT_EQ(b.after.has_value(), after.has_value());
      if (after) {
        ASSERT_EQ(b.after->entry.index, *after);
      }
      ASSERT_EQ(check_bracket(b, iss, t, w.policy), BracketVerdict::kOk);
    }
  }
}

TEST(Ledger, ConsistencyAcrossGrowth) {
  World w;
  std::vector<SignedDigest> seen;
  for (int i = 0; i < 12; ++i) {
    w.clock.advance(3);
    seen.push_back(w.publish(i % 2 ? kIssA : kIssB, fakes::keyset(i)).digest);
  }
  for (size_t i = 0; i < seen.size(); ++i) {
    for (size_t j = i; j < seen.size(); ++j) {
      const auto p = w.ledger.prove_consistency(seen[i].tree_size, seen[j].tree_size);
      ASSERT_TRUE(merkle::verify_consistency(p, seen[i].root, seen[j].root));
    }
  }
}

TEST(Ledger, ManualCosignatureIsIdempotent) {
  World w(3, 2);
  JwkLedger bare(w.log_key, w.clock.as_clock());
  w.source->set(kIssA, fakes::keyset(1));
  const AppendResult r = bare.append(kIssA, fakes::keyset(1));
  EXPECT_TRUE(r.digest.cosignatures.empty());
  CosignRequest req;
  req.proposed = r.digest;
  req.delta = r.entry;
  req.delta_inclusion = bare.prove_inclusion(0, 1);
  req.consistency.new_size = 1;
  const Cosignature c = *w.ws[0]->cosign(req).cosignature;
  bare.add_cosignature(r.digest, c);
  bare.add_cosignature(r.digest, c);
  EXPECT_EQ(bare.latest_digest().cosignatures.size(), 1u);
  SignedDigest stale = r.digest;
  stale.timestamp -= 1;
  EXPECT_THROW(bare.add_cosignature(stale, c), Error);
}
