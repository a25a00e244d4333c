// One line per acceptance criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "poa/common/error.hpp"
#include "poa/gq/gq_pok.hpp"
#include "poa/merkle/merkle.hpp"
#include "poa/verifier/bench.hpp"
#include "poa/verifier/games.hpp"
#include "poa/verifier/topology.hpp"

using namespace poa;
using namespace poa::verifier;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

TopologyOptions toy(uint64_t seed) {
  TopologyOptions o;
  o.seed = seed;
  return o;
}

Outcome completeness() {
  Topology t(toy(101));
  const GameResult r = game_completeness(t, 100, false);
  return {r.successes == 100 && r.trials == 100, std::to_string(r.successes) + "/100 verified"};
}

Outcome per_round_soundness() {
  const GameResult r = soundness_interactive(3, 1, 3000, 102);
  const Interval ci = wilson_interval(r.successes, r.trials);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu/3000 = %.4f, 99%% CI [%.4f, %.4f] vs 1/3",
                static_cast<unsigned long long>(r.successes), r.rate(), ci.low, ci.high);
  return {ci.contains(1.0 / 3), buf};
}

Outcome amplification() {
  const GameResult r = soundness_interactive(3, 8, 10000, 103);
  char buf[120];
  std::snprintf(buf, sizeof buf, "%llu/10000 = %.5f (expected ~%.2e)",
                static_cast<unsigned long long>(r.successes), r.rate(), 1.0 / 6561);
  return {r.rate() < 0.01, buf};
}

Outcome round_formula() {
  const gq::RoundParams a = gq::round_count(128, 65537);
  const gq::RoundParams b = gq::round_count(64, 7);
  const bool ok = a.rounds == 8 && a.challenge_bits == 16 && b.rounds == 32 && b.challenge_bits == 2 &&
                  oracle::ilog2(65537) == 16 && oracle::ilog2(7) == 2;
  return {ok, "round_count(128,65537)=" + std::to_string(a.rounds) +
                  ", round_count(64,7)=" + std::to_string(b.rounds)};
}

Outcome replay() {
  Topology t(toy(105));
  const auto results = game_replay(t, 1000);
  uint64_t forged = 0;
  uint64_t control = 0;
  uint64_t control_trials = 0;
  for (const auto& r : results) {
    if (r.name.find("control") != std::string::npos) {
      control = r.successes;
      control_trials = r.trials;
    } else {
      forged += r.successes;
    }
  }
  return {results.size() == 3 && forged == 0 && control == control_trials && control_trials == 1000,
          std::to_string(forged) + " forged tokens over 1000 trials; strawman control " +
              std::to_string(control) + "/" + std::to_string(control_trials)};
}

Outcome never_embed() {
  Topology t(toy(106));
  int clean = 0;
  for (int i = 0; i < 200; ++i) {
    t.clock.advance(1);
    const Issued issued = t.request("user" + std::to_string(i) + "@example.com");
    const Bytes& sig = issued.token.token.signature_bytes;
    if (!contains_subsequence(issued.cert.der, sig) &&
        !contains_subsequence(issued.cert.der, as_bytes(base64url_encode(sig)))) {
      ++clean;
    }
  }
  return {clean == 200, std::to_string(clean) + "/200 certificates free of signature bytes"};
}

Outcome ledger_integrity() {
  std::vector<Bytes> leaves;
  for (int i = 0; i < 32; ++i) leaves.push_back({static_cast<uint8_t>(i), 0x5a});
  merkle::Tree tree;
  for (const Bytes& l : leaves) tree.append(merkle::leaf_hash(l));
  uint64_t checked = 0;
  for (size_t n = 1; n <= 32; ++n) {
    const std::vector<Bytes> prefix(leaves.begin(), leaves.begin() + n);
    const Digest32 root = oracle::mth(prefix);
    if (tree.root(n) != root) return {false, "root mismatch at size " + std::to_string(n)};
    for (size_t i = 0; i < n; ++i) {
      const merkle::InclusionProof p = tree.prove_inclusion(i, n);
      if (p.path != oracle::path(i, prefix, 0, n) || !merkle::verify_inclusion(merkle::leaf_hash(leaves[i]), p, root)) {
        return {false, "inclusion " + std::to_string(i) + "/" + std::to_string(n)};
      }
      ++checked;
    }
    for (size_t m = 1; m <= n; ++m) {
      const merkle::ConsistencyProof p = tree.prove_consistency(m, n);
      if (p.path != oracle::consistency(m, leaves, n) ||
          !merkle::verify_consistency(p, oracle::mth(std::vector<Bytes>(leaves.begin(), leaves.begin() + m)), root)) {
        return {false, "consistency " + std::to_string(m) + "->" + std::to_string(n)};
      }
      ++checked;
    }
  }
  uint64_t rewrites = 0;
  for (size_t victim = 0; victim < 32; ++victim) {
    std::vector<Bytes> forged = leaves;
    forged[victim] = {0xee, static_cast<uint8_t>(victim)};
    merkle::Tree f;
    for (const Bytes& l : forged) f.append(merkle::leaf_hash(l));
    for (size_t m = victim + 1; m <= 32; ++m) {
      for (size_t n = m; n <= 32; ++n) {
        if (merkle::verify_consistency(f.prove_consistency(m, n), tree.root(m), f.root(n))) {
          return {false, "rewrite of leaf " + std::to_string(victim) + " undetected"};
        }
        ++rewrites;
      }
    }
  }
  return {true, std::to_string(checked) + " proofs match the oracle; " + std::to_string(rewrites) +
                    " rewritten-leaf checks fail consistency"};
}

Outcome bracket_correctness() {
  uint64_t queries = 0;
  for (uint64_t s = 0; s < 50; ++s) {
    Topology t(toy(1000 + s));
    // (recorded_at, key set) for every change the honest log saw.
    std::vector<std::pair<int64_t, jose::Jwks>> history{{t.clock.now(), t.idp->active_keys()}};
    const uint64_t rotations = 2 + t.rng->uniform(5);
    for (uint64_t i = 0; i < rotations; ++i) {
      t.clock.advance(1 + static_cast<int64_t>(t.rng->uniform(600)));
      t.rotate();
      history.emplace_back(t.clock.now(), t.idp->active_keys());
    }
    const int64_t start = history.front().first;
    const int64_t end = t.clock.now();
    const ledger::QuorumPolicy policy = t.trust.quorum_policy();
    for (int q = 0; q < 20; ++q) {
      const int64_t when = start - 5 + static_cast<int64_t>(t.rng->uniform(static_cast<uint64_t>(end - start + 10)));
      const jose::Jwks* expect = nullptr;
      for (const auto& [at, keys] : history) {
        if (at <= when) expect = &keys;
      }
      t.clock.set(std::max(end, when));
      ledger::TimestampBracket b;
      try {
        b = t.ledger->query_at(t.options().issuer, when);
      } catch (const Error& e) {
        if (expect == nullptr && e.code() == ErrorCode::kUnknownAtTime) continue;
        return {false, "schedule " + std::to_string(s) + ": unexpected " + std::string(to_string(e.code()))};
      }
      if (expect == nullptr) return {false, "answer before the first entry"};
      if (!ledger::client_check_quorum(b.digest, policy).accepted) continue;
      if (ledger::check_bracket(b, t.options().issuer, when, policy) != ledger::BracketVerdict::kOk ||
          !b.before.entry.jwks.same_keys(*expect)) {
        return {false, "schedule " + std::to_string(s) + " t=" + std::to_string(when) + " disagrees with linear scan"};
      }
      ++queries;
    }
  }
  return {true, std::to_string(queries) + " quorum-accepted answers match the linear scan over 50 schedules"};
}

Outcome rotation_survival() {
  Topology t(toy(109));
  std::vector<Issued> issued;
  for (int i = 0; i < 5; ++i) {
    t.clock.advance(10);
    issued.push_back(t.request("early" + std::to_string(i) + "@example.com"));
  }
  for (int r = 0; r < 3; ++r) {
    t.clock.advance(120);
    t.rotate();
  }
  int ok = 0;
  const Verifier v = t.verifier();
  for (const auto& i : issued) ok += v.verify(i.cert.der).accepted ? 1 : 0;
  return {ok == 5 && t.idp->rotation_counter() == 3,
          std::to_string(ok) + "/5 certificates verify after " + std::to_string(t.idp->rotation_counter()) +
              " rotations"};
}

Outcome table_scenarios() {
  Topology t(toy(110));
  const auto rogue = game_unforgeability(t, 30);
  bool step6 = !rogue.empty();
  for (const auto& r : rogue) step6 = step6 && r.passed && r.successes == 0;

  // Rewritten ledger: same keys and first entry, different second entry.
  Topology original(toy(111));
  original.clock.advance(100);
  original.rotate();
  const ledger::SignedDigest pinned = original.ledger->latest_digest();
  Topology rewritten(toy(111));
  rewritten.clock.advance(200);
  rewritten.rotate();
  const Issued cert = rewritten.request("alice@example.com");
  Verifier v = rewritten.verifier();
  const bool unpinned_accepts = v.verify(cert.cert.der).accepted;
  v.pin(pinned);
  const VerificationReport r = v.verify(cert.cert.der);
  const bool detected = r.failed_step() == 5 && r.failure_reason().rfind("pinned-digest-inconsistent", 0) == 0;
  return {step6 && unpinned_accepts && detected,
          std::string("(a) rogue-CA strategies rejected at step 6: ") + (step6 ? "yes" : "no") +
              "; (b) rewrite detected via consistency: " + (detected ? "yes" : "no")};
}

Outcome size_report() {
  TopologyOptions o;
  o.profile = Profile::standard();
  o.seed = 112;
  Topology t(o);
  const BenchReport b = run_bench(t, 1);
  std::printf("%s", b.to_text().c_str());
  const bool ok = b.proof_bytes == 4102 + b.kid_bytes && b.proof_bytes == b.expected_proof_bytes &&
                  b.modulus_bits == 2048 && b.lambda == 128;
  return {ok, "proof " + std::to_string(b.proof_bytes) + " = 4102 + " + std::to_string(b.kid_bytes) +
                  "; cert/baseline ratio " + b.ratio_text() + " (reported)"};
}

Outcome mutation_suite() {
  Topology t(toy(113));
  const Issued issued = t.request("alice@example.com");
  const ca::Certificate cert = ca::Certificate::from_der(issued.cert.der);
  const Verifier v = t.verifier();
  if (!v.verify(cert).accepted) return {false, "unmutated certificate rejected"};
  const std::string oids[2] = {t.trust.oids.signing_input, t.trust.oids.proof};
  const Bytes payload[2] = {*cert.extension(oids[0]), *cert.extension(oids[1])};
  int rejected = 0;
  for (int i = 0; i < 500; ++i) {
    const int which = static_cast<int>(t.rng->uniform(2));
    Bytes m = payload[which];
    const size_t pos = t.rng->uniform(m.size());
    m[pos] ^= static_cast<uint8_t>(1 + t.rng->uniform(255));
    // Re-signed with the CA key and logged, so only the extension differs.
    ca::LeafContents c = contents_of(cert, t.trust, *t.rng);
    if (which == 0) {
      c.signing_input = to_string(m);
    } else {
      c.proof = m;
    }
    if (!v.verify(forge_certificate(t, c)).accepted) ++rejected;
  }
  return {rejected == 500, std::to_string(rejected) + "/500 extension mutations rejected"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "completeness", 60, completeness},
      {2, "per-round soundness", 60, per_round_soundness},
      {3, "soundness amplification", 120, amplification},
      {4, "round-count formula", 1, round_formula},
      {5, "replay protection", 60, replay},
      {6, "never-embed-signature", 60, never_embed},
      {7, "ledger integrity", 30, ledger_integrity},
      {8, "bracket correctness", 30, bracket_correctness},
      {9, "rotation survival", 60, rotation_survival},
      {10, "rogue CA and ledger rewrite", 60, table_scenarios},
      {11, "size report", 1e9, size_report},
      {12, "mutation suite", 120, mutation_suite},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < c.limit_s;
    const bool pass = o.ok && in_time;
    if (!pass) ++failures;
    if (c.limit_s < 1e8) {
      std::printf("criterion %2d %-28s %s  %.2fs (limit %.0fs)  %s%s\n", c.id, c.name, pass ? "PASS" : "FAIL", s,
                  c.limit_s, o.detail.c_str(), in_time ? "" : " [over time limit]");
    } else {
      std::printf("criterion %2d %-28s %s  %.2fs  %s\n", c.id, c.name, pass ? "PASS" : "FAIL", s, o.detail.c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
