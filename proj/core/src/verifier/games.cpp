#include "poa/verifier/games.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "poa/common/bigint.hpp"
#include "poa/common/error.hpp"
#include "poa/gq/gq_pok.hpp"

namespace poa::verifier {
namespace {

std::string victim_sub(uint64_t i) {
  return i % 2 == 0 ? "victim" + std::to_string(i) + "@example.com"
                    : "https://ci.example/job/" + std::to_string(i);
}

// A token for the victim that the IdP never signed.
std::string fabricated_input(Topology& topo, uint64_t i) {
  jose::JwtHeader header{"RS256", topo.idp->signing_public_key().key_id, std::string("JWT")};
  jose::OidcClaims claims;
  claims.iss = topo.options().issuer;
  claims.sub = victim_sub(i);
  claims.aud = {topo.options().ca_id};
  claims.iat = topo.clock.now();
  claims.exp = claims.iat + 600;
  claims.nonce = "forged";
  return make_signing_input(header, claims);
}

ca::LeafContents rogue_contents(Topology& topo, const std::string& signing_input, Bytes proof) {
  const jose::SignedContent content = jose::parse_signing_input(signing_input);
  ca::LeafContents c;
  c.fields = ca::claim_map(content.claims, topo.trust.cert_lifetime);
  c.subject_spki = SigningKey::generate_p256().public_key().der();
  c.serial = topo.rng->bytes(16);
  c.serial[0] = static_cast<uint8_t>((c.serial[0] & 0x3f) | 0x40);
  c.signing_input = signing_input;
  c.proof = std::move(proof);
  c.oids = topo.trust.oids;
  return c;
}

gq::GqProof proof_skeleton(const gq::RsaPublicKey& pk, unsigned lambda) {
  const gq::RoundParams params = gq::round_count(lambda, pk.exponent);
  gq::GqProof p;
  p.rounds = params.rounds;
  p.challenge_bits = params.challenge_bits;
  p.modulus_len = pk.modulus_bytes();
  p.key_id = pk.key_id;
  return p;
}

// Fresh 512-bit key for the standalone soundness experiments.
idp::RsaPrivateKey toy_key(unsigned long e, RandomSource& rng) {
  return idp::generate_rsa(512, e, rng);
}

mpz_class random_statement(const gq::RsaPublicKey& pk, RandomSource& rng) {
  return gq::padded_message(pk, rng.bytes(48));
}

GameResult rate_result(std::string name, uint64_t trials, uint64_t successes, double p,
                       unsigned rounds) {
  GameResult r;
  r.name = std::move(name);
  r.trials = trials;
  r.successes = successes;
  char buf[96];
  if (rounds == 1) {
    r.passed = wilson_interval(successes, trials).contains(p);
    std::snprintf(buf, sizeof buf, "99%% CI contains %.4f", p);
  } else {
    r.passed = r.rate() < 0.01;
    std::snprintf(buf, sizeof buf, "rate < 0.01 (expected %.2e)", std::pow(p, rounds));
  }
  r.expectation = buf;
  return r;
}

}  // namespace

Interval wilson_interval(uint64_t successes, uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

nlohmann::json GameResult::to_json() const {
  const Interval ci = wilson_interval(successes, trials);
  return {{"name", name},         {"trials", trials},       {"successes", successes},
          {"rate", rate()},       {"ci99_low", ci.low},     {"ci99_high", ci.high},
          {"passed", passed},     {"expectation", expectation}};
}

std::string make_signing_input(const jose::JwtHeader& header, const jose::OidcClaims& claims) {
  return base64url_encode(as_bytes(jose::header_json(header))) + "." +
         base64url_encode(as_bytes(jose::claims_json(claims)));
}

ca::LeafContents contents_of(const ca::Certificate& cert, const TrustRoots& trust, RandomSource& rng) {
  ca::LeafContents c;
  const auto input = cert.extension(trust.oids.signing_input);
  if (!input) fail(ErrorCode::kMalformed, "certificate lacks a signing input");
  c.signing_input = to_string(*input);
  const jose::SignedContent content = jose::parse_signing_input(*c.signing_input);
  c.fields = ca::claim_map(content.claims, trust.cert_lifetime);
  c.subject_spki = cert.subject_public_key();
  c.serial = rng.bytes(16);
  c.serial[0] = static_cast<uint8_t>((c.serial[0] & 0x3f) | 0x40);
  c.proof = cert.extension(trust.oids.proof);
  c.oids = trust.oids;
  return c;
}

ca::Certificate forge_certificate(Topology& topo, const ca::LeafContents& contents) {
  const ca::Certificate precert = ca::build_precertificate(contents, topo.root, topo.ca_key);
  const ct::Sct sct = topo.ct->submit_precert(ca::tbs_bytes(precert));
  return ca::attach_sct(precert, sct.encode(), contents.oids.sct, topo.ca_key);
}

GameResult game_completeness(Topology& topo, uint64_t trials, bool interleave_rotations) {
  GameResult r;
  r.name = interleave_rotations ? "completeness-with-rotations" : "completeness";
  r.trials = trials;
  r.expectation = "all accepted";
  std::vector<ca::Certificate> certs;
  for (uint64_t i = 0; i < trials; ++i) {
    topo.clock.advance(static_cast<int64_t>(topo.rng->uniform(30)));
    const std::string sub = i % 2 == 0 ? "user" + std::to_string(i) + "@example.com"
                                       : "https://ci.example/job/" + std::to_string(i);
    const int64_t lifetime = 120 + static_cast<int64_t>(topo.rng->uniform(3480));
    certs.push_back(ca::Certificate::from_der(topo.request(sub, lifetime).cert.der));
    if (interleave_rotations && topo.rng->uniform(4) == 0) {
      topo.clock.advance(60);
      topo.rotate();
    }
  }
  if (interleave_rotations) {
    topo.clock.advance(60);
    topo.rotate();
  }
  const Verifier v = topo.verifier();
  for (const auto& cert : certs) {
    if (v.verify(cert).accepted) ++r.successes;
  }
  r.passed = r.successes == r.trials;
  return r;
}

std::vector<GameResult> game_unforgeability(Topology& topo, uint64_t trials) {
  const gq::RsaPublicKey pk = topo.idp->signing_public_key();
  const unsigned lambda = topo.trust.lambda;
  const Verifier v = topo.verifier();

  // A genuine proof over a different token, for the transplant strategy.
  const Issued donor = topo.request("donor@example.com");
  const Bytes donor_proof =
      *ca::Certificate::from_der(donor.cert.der).extension(topo.trust.oids.proof);

  std::vector<GameResult> out;
  const char* names[3] = {"unforgeability-a-random-proof", "unforgeability-b-simulated-proof",
                          "unforgeability-c-transplanted-proof"};
  for (int strategy = 0; strategy < 3; ++strategy) {
    GameResult r;
    r.name = names[strategy];
    r.trials = trials;
    r.expectation = "0 accepted, all rejected at step 6";
    bool all_step6 = true;
    for (uint64_t i = 0; i < trials; ++i) {
      const std::string input = fabricated_input(topo, i);
      Bytes proof_bytes;
      if (strategy == 0) {
        gq::GqProof p = proof_skeleton(pk, lambda);
        for (unsigned k = 0; k < p.rounds; ++k) {
          p.commitments.push_back(topo.rng->uniform_unit(pk.modulus));
          p.responses.push_back(topo.rng->uniform_unit(pk.modulus));
        }
        proof_bytes = p.encode();
      } else if (strategy == 1) {
        gq::GqProof p = proof_skeleton(pk, lambda);
        gq::Challenges c;
        for (unsigned k = 0; k < p.rounds; ++k) c.push_back(topo.rng->uniform(1ULL << p.challenge_bits));
        const gq::SimulatedTranscript t =
            gq::simulate(pk, gq::padded_message(pk, as_bytes(input)), c, *topo.rng);
        p.commitments = t.commitments;
        p.responses = t.responses;
        proof_bytes = p.encode();
      } else {
        proof_bytes = donor_proof;
      }
      const ca::Certificate cert = forge_certificate(topo, rogue_contents(topo, input, proof_bytes));
      const VerificationReport report = v.verify(cert);
      if (report.accepted) ++r.successes;
      if (report.failed_step() != 6) all_step6 = false;
    }
    r.passed = r.successes == 0 && all_step6;
    out.push_back(r);
  }
  return out;
}

GameResult soundness_interactive(unsigned long e, unsigned rounds, uint64_t trials, uint64_t seed) {
  SeededRandom rng(seed);
  const idp::RsaPrivateKey key = toy_key(e, rng);
  const gq::RsaPublicKey& pk = key.pub;
  uint64_t successes = 0;
  for (uint64_t i = 0; i < trials; ++i) {
    const mpz_class x = random_statement(pk, rng);
    const mpz_class x_inv = invert(x, pk.modulus);
    bool ok = true;
    for (unsigned k = 0; k < rounds && ok; ++k) {
      // Forger: guess c', answer z, commit T = z^e * X^-c'.
      const uint64_t guess = rng.uniform(e);
      const mpz_class z = rng.uniform_unit(pk.modulus);
      const mpz_class t = (powm(z, pk.exponent, pk.modulus) * powm(x_inv, guess, pk.modulus)) % pk.modulus;
      // Verifier: uniform challenge in [0, e).
      const uint64_t c = rng.uniform(e);
      ok = gq::check_round(pk, x, t, z, c);
    }
    if (ok) ++successes;
  }
  return rate_result("soundness-interactive-e" + std::to_string(e) + "-t" + std::to_string(rounds),
                     trials, successes, 1.0 / static_cast<double>(e), rounds);
}

GameResult soundness_fiat_shamir(unsigned rounds, uint64_t trials, uint64_t seed) {
  SeededRandom rng(seed);
  const idp::RsaPrivateKey key = toy_key(3, rng);
  const gq::RsaPublicKey& pk = key.pub;
  const unsigned lambda = rounds;  // b = 1 at e = 3
  uint64_t successes = 0;
  for (uint64_t i = 0; i < trials; ++i) {
    const mpz_class x = random_statement(pk, rng);
    const mpz_class x_inv = invert(x, pk.modulus);
    gq::GqProof p = proof_skeleton(pk, lambda);
    for (unsigned k = 0; k < p.rounds; ++k) {
      const uint64_t guess = rng.uniform(2);
      const mpz_class z = rng.uniform_unit(pk.modulus);
      p.commitments.push_back((powm(z, pk.exponent, pk.modulus) * powm(x_inv, guess, pk.modulus)) %
                              pk.modulus);
      p.responses.push_back(z);
    }
    if (gq::verify_statement(pk, x, p, lambda)) ++successes;
  }
  return rate_result("soundness-fiat-shamir-e3-t" + std::to_string(rounds), trials, successes, 0.5,
                     rounds);
}

std::vector<GameResult> game_replay(Topology& topo, uint64_t trials) {
  GameResult reattach{"replay-a-reattach-proof", trials, 0, false, "0 forged tokens"};
  GameResult algebraic{"replay-b-algebraic", trials, 0, false, "0 forged tokens"};
  GameResult control{"replay-strawman-control", trials, 0, false, "every trial forges a token"};

  for (uint64_t i = 0; i < trials; ++i) {
    topo.clock.advance(1);
    const Issued issued = topo.request("replay" + std::to_string(i) + "@example.com");
    const jose::Jwks jwks = topo.idp->active_keys();  // what a relying party would trust now
    const ca::Certificate cert = ca::Certificate::from_der(issued.cert.der);
    const std::string input = to_string(*cert.extension(topo.trust.oids.signing_input));
    const Bytes wire = *cert.extension(topo.trust.oids.proof);
    const gq::GqProof proof = gq::GqProof::decode(wire);

    // (a) Present "input.<bytes>" to a relying party for every byte string the
    // certificate exposes that could plausibly serve as a signature.
    std::vector<Bytes> candidates{wire};
    for (const auto& v : proof.commitments) candidates.push_back(mpz_to_bytes(v, proof.modulus_len));
    for (const auto& v : proof.responses) candidates.push_back(mpz_to_bytes(v, proof.modulus_len));
    bool forged = false;
    for (const Bytes& sig : candidates) {
      try {
        const jose::OidcToken tok = jose::parse_compact(input + "." + base64url_encode(sig));
        if (jose::verify_rs256(jwks, tok) == jose::Rs256Verdict::kAccept) forged = true;
      } catch (const Error&) {
      }
    }
    if (forged) ++reattach.successes;

    // (b) Products z^a T^b X^k of one round, and ratios of two rounds.
    const gq::RsaPublicKey pk = *jwks.find(proof.key_id);
    const mpz_class& n = pk.modulus;
    const mpz_class x = gq::padded_message(pk, as_bytes(input));
    auto pow_signed = [&](const mpz_class& base, int k) {
      return k >= 0 ? powm(base, static_cast<unsigned long>(k), n)
                    : powm(invert(base, n), static_cast<unsigned long>(-k), n);
    };
    auto is_root = [&](const mpz_class& s) { return powm(s, pk.exponent, n) == x; };
    bool found = false;
    for (unsigned r = 0; r < proof.rounds && !found; ++r) {
      for (int a = -2; a <= 2 && !found; ++a) {
        for (int b = -2; b <= 2 && !found; ++b) {
          const mpz_class zt = (pow_signed(proof.responses[r], a) * pow_signed(proof.commitments[r], b)) % n;
          for (int k = -2; k <= 2 && !found; ++k) {
            if (a == 0 && b == 0) continue;
            found = is_root((zt * pow_signed(x, k)) % n);
          }
        }
      }
      for (unsigned s = 0; s < proof.rounds && !found; ++s) {
        if (s == r) continue;
        const mpz_class ratio = (proof.responses[r] * invert(proof.responses[s], n)) % n;
        found = is_root(ratio) || is_root((ratio * proof.commitments[s] * invert(proof.commitments[r], n)) % n);
      }
    }
    if (found) ++algebraic.successes;

    // Control: the insecure design embeds the whole token, signature included.
    ca::LeafContents strawman = contents_of(cert, topo.trust, *topo.rng);
    strawman.signing_input = issued.token.compact;
    strawman.proof.reset();
    const ca::Certificate published =
        ca::Certificate::from_der(forge_certificate(topo, strawman).der());
    const std::string exposed = to_string(*published.extension(topo.trust.oids.signing_input));
    try {
      if (jose::verify_rs256(jwks, jose::parse_compact(exposed)) == jose::Rs256Verdict::kAccept) {
        ++control.successes;
      }
    } catch (const Error&) {
    }
  }
  reattach.passed = reattach.successes == 0;
  algebraic.passed = algebraic.successes == 0;
  control.passed = control.successes == control.trials;
  return {reattach, algebraic, control};
}

bool GamesSummary::passed() const {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

nlohmann::json GamesSummary::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) arr.push_back(r.to_json());
  return {{"passed", passed()}, {"games", arr}};
}

std::string GamesSummary::to_text() const {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof line, "%-40s %8s %10s %9s  %s\n", "game", "trials", "successes", "rate",
                "result");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-40s %8llu %10llu %9.5f  %s (%s)\n", r.name.c_str(),
                  static_cast<unsigned long long>(r.trials),
                  static_cast<unsigned long long>(r.successes), r.rate(), r.passed ? "PASS" : "FAIL",
                  r.expectation.c_str());
    out << line;
  }
  return out.str();
}

GamesSummary run_games(const Profile& profile, uint64_t trials, uint64_t seed) {
  GamesSummary s;
  {
    TopologyOptions o;
    o.profile = profile;
    o.seed = seed;
    Topology topo(o);
    s.results.push_back(game_completeness(topo, trials, false));
  }
  {
    TopologyOptions o;
    o.profile = profile;
    o.seed = seed + 1;
    Topology topo(o);
    s.results.push_back(game_completeness(topo, trials, true));
  }
  {
    TopologyOptions o;
    o.profile = profile;
    o.seed = seed + 2;
    Topology topo(o);
    for (auto& r : game_unforgeability(topo, trials)) s.results.push_back(r);
  }
  const uint64_t soundness_trials = std::max<uint64_t>(trials, 3000);
  s.results.push_back(soundness_interactive(3, 1, soundness_trials, seed + 3));
  s.results.push_back(soundness_interactive(3, 8, std::max<uint64_t>(trials, 10000), seed + 4));
  s.results.push_back(soundness_fiat_shamir(1, soundness_trials, seed + 5));
  s.results.push_back(soundness_fiat_shamir(8, std::max<uint64_t>(trials, 10000), seed + 6));
  {
    TopologyOptions o;
    o.profile = profile;
    o.seed = seed + 7;
    Topology topo(o);
    for (auto& r : game_replay(topo, trials)) s.results.push_back(r);
  }
  return s;
}

}  // namespace poa::verifier
