#include "poa/verifier/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "poa/gq/gq_pok.hpp"

namespace poa::verifier {
namespace {

template <typename F>
double median_ms(unsigned iterations, F&& f) {
  std::vector<double> samples;
  for (unsigned i = 0; i < std::max(1u, iterations); ++i) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const auto end = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(end - start).count());
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

}  // namespace

double BenchReport::ratio() const {
  return baseline_cert_bytes == 0 ? 0.0
                                  : static_cast<double>(cert_bytes) / static_cast<double>(baseline_cert_bytes);
}

std::string BenchReport::ratio_text() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", ratio());
  return buf;
}

nlohmann::json BenchReport::to_json() const {
  return {{"profile", profile},
          {"modulus_bits", modulus_bits},
          {"exponent", exponent},
          {"lambda", lambda},
          {"rounds", rounds},
          {"kid_bytes", kid_bytes},
          {"proof_bytes", proof_bytes},
          {"expected_proof_bytes", expected_proof_bytes},
          {"cert_bytes", cert_bytes},
          {"baseline_cert_bytes", baseline_cert_bytes},
          {"ratio", ratio_text()},
          {"prove_ms", prove_ms},
          {"verify_ms", verify_ms},
          {"issuance_ms", issuance_ms},
          {"certificate_verify_ms", certificate_verify_ms}};
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  char line[160];
  auto row = [&](const char* name, const std::string& value) {
    std::snprintf(line, sizeof line, "%-28s %s\n", name, value.c_str());
    out << line;
  };
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3f", v);
    return std::string(b);
  };
  row("profile", profile);
  row("modulus bits", std::to_string(modulus_bits));
  row("exponent", std::to_string(exponent));
  row("lambda", std::to_string(lambda));
  row("rounds", std::to_string(rounds));
  row("proof bytes", std::to_string(proof_bytes));
  row("expected proof bytes", std::to_string(expected_proof_bytes));
  row("certificate bytes", std::to_string(cert_bytes));
  row("baseline certificate bytes", std::to_string(baseline_cert_bytes));
  row("ratio", ratio_text());
  row("prove ms", num(prove_ms));
  row("verify ms", num(verify_ms));
  row("issuance ms", num(issuance_ms));
  row("certificate verify ms", num(certificate_verify_ms));
  return out.str();
}

BenchReport run_bench(Topology& topo, unsigned iterations) {
  BenchReport r;
  const Profile& p = topo.options().profile;
  r.profile = p.name;
  r.modulus_bits = p.modulus_bits;
  r.exponent = p.exponent;
  r.lambda = p.lambda;

  const gq::RsaPublicKey pk = topo.idp->signing_public_key();
  const gq::RoundParams params = gq::round_count(p.lambda, pk.exponent);
  r.rounds = params.rounds;
  r.kid_bytes = pk.key_id.size();
  r.expected_proof_bytes = 5 + 2 * params.rounds * pk.modulus_bytes() + 1 + pk.key_id.size();

  Issued issued;
  r.issuance_ms = median_ms(iterations, [&] { issued = topo.request("bench@example.com"); });
  const ca::Certificate cert = ca::Certificate::from_der(issued.cert.der);
  r.cert_bytes = issued.cert.der.size();
  r.proof_bytes = cert.extension(topo.trust.oids.proof)->size();

  // Baseline: same request flow, CA omits the two extensions.
  {
    const SigningKey key = SigningKey::generate_p256();
    const Bytes spki = key.public_key().der();
    const Bytes challenge = topo.ca->new_challenge(spki);
    idp::TokenRequest req{"bench@example.com", topo.options().ca_id, 600, hex_encode(challenge), {}};
    const idp::IssuedToken tok = topo.idp->issue_token(req, topo.clock.now());
    const ca::PoaCertificate base =
        topo.ca->issue_baseline({tok.compact, spki, challenge, key.sign(challenge)}, topo.clock.now());
    r.baseline_cert_bytes = base.der.size();
  }

  const std::string& input = issued.token.token.signing_input;
  gq::GqProof proof;
  r.prove_ms = median_ms(iterations, [&] {
    proof = gq::prove(pk, as_bytes(input), issued.token.token.signature, p.lambda, *topo.rng);
  });
  r.verify_ms = median_ms(iterations, [&] { gq::verify_proof(pk, as_bytes(input), proof, p.lambda); });
  const Verifier v = topo.verifier();
  r.certificate_verify_ms = median_ms(iterations, [&] { v.verify(cert); });
  return r;
}

}  // namespace poa::verifier
