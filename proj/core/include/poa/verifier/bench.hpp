#pragma once

#include <cstddef>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "poa/verifier/topology.hpp"

namespace poa::verifier {

struct BenchReport {
  std::string profile;
  unsigned modulus_bits = 0;
  unsigned long exponent = 0;
  unsigned lambda = 0;
  unsigned rounds = 0;
  size_t kid_bytes = 0;
  size_t proof_bytes = 0;
  size_t expected_proof_bytes = 0;  // 5 + 2 t L + 1 + |kid|
  size_t cert_bytes = 0;
  size_t baseline_cert_bytes = 0;  // same certificate without the two extensions
  double prove_ms = 0;
  double verify_ms = 0;
  double issuance_ms = 0;
  double certificate_verify_ms = 0;

  double ratio() const;
  // Ratio rounded to two decimals, as printed.
  std::string ratio_text() const;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Measures sizes and timings on an in-process topology. Timings are
/// medians over `iterations` runs.
BenchReport run_bench(Topology& topo, unsigned iterations);

}  // namespace poa::verifier
