#pragma once

// Executable security games: completeness, unforgeability against a party
// holding the CA key, and replay of the token from a published certificate.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "poa/ca/x509.hpp"
#include "poa/jose/jose.hpp"
#include "poa/verifier/topology.hpp"

namespace poa::verifier {

inline constexpr double kZ99 = 2.5758293035489;

struct Interval {
  double low = 0;
  double high = 0;
  bool contains(double p) const { return low <= p && p <= high; }
};

// Wilson score interval for a binomial proportion.
Interval wilson_interval(uint64_t successes, uint64_t trials, double z = kZ99);

struct GameResult {
  std::string name;
  uint64_t trials = 0;
  uint64_t successes = 0;
  bool passed = false;
  std::string expectation;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
  nlohmann::json to_json() const;
};

// base64url(header) "." base64url(claims) for a token nobody signed.
std::string make_signing_input(const jose::JwtHeader& header, const jose::OidcClaims& claims);

// Leaf contents equivalent to an issued certificate (fresh serial).
ca::LeafContents contents_of(const ca::Certificate& cert, const TrustRoots& trust, RandomSource& rng);

/// What a holder of the CA key can do: build and sign any leaf, and log it
/// with the public CT log to get a genuine SCT.
ca::Certificate forge_certificate(Topology& topo, const ca::LeafContents& contents);

/// Issue-then-verify for randomized identities and token lifetimes. With
/// rotations, the IdP rotates between issuance and verification.
GameResult game_completeness(Topology& topo, uint64_t trials, bool interleave_rotations);

/// Rogue-CA strategies: (a) random proof values, (b) simulator transcripts
/// for random challenges, (c) a real proof transplanted from another token.
/// Each trial fabricates a token for a victim identity. Successes are
/// certificates the verifier accepts; a strategy passes with zero successes
/// and every rejection at step 6.
std::vector<GameResult> game_unforgeability(Topology& topo, uint64_t trials);

/// Interactive GQ challenge-guessing forger: the verifier draws each
/// challenge uniformly from [0, e) and the forger, lacking sigma, commits to
/// a guess. A trial succeeds when every round checks.
GameResult soundness_interactive(unsigned long e, unsigned rounds, uint64_t trials, uint64_t seed);

/// The same guessing forger against the non-interactive proof at e = 3,
/// where b = 1 bit challenges come from the transcript hash.
GameResult soundness_fiat_shamir(unsigned rounds, uint64_t trials, uint64_t seed);

/// Replay strategies: (a) re-attach proof bytes as a JWS signature and log
/// in at a relying party, (b) algebraic recombination of one transcript,
/// and the positive control that embeds the real signature.
std::vector<GameResult> game_replay(Topology& topo, uint64_t trials);

struct GamesSummary {
  std::vector<GameResult> results;

  bool passed() const;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Runs every game in fresh in-process topologies.
GamesSummary run_games(const Profile& profile, uint64_t trials, uint64_t seed);

}  // namespace poa::verifier
