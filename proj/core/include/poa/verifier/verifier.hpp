#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "poa/ca/x509.hpp"
#include "poa/ct/ct_log.hpp"
#include "poa/ledger/types.hpp"
#include "poa/verifier/trust.hpp"

namespace poa::verifier {

inline constexpr int kStepCount = 7;

struct StepResult {
  int step = 0;
  bool passed = false;
  std::string reason;  // empty on pass

  bool operator==(const StepResult&) const = default;
};

enum class CtInclusion { kNotChecked, kVerified, kOffline };

struct VerificationReport {
  bool accepted = false;
  std::vector<StepResult> steps;  // 1..7 in order, stops at the first failure
  std::optional<int64_t> current_time;
  CtInclusion ct_inclusion = CtInclusion::kNotChecked;

  // Step number of the failure, 0 when accepted.
  int failed_step() const;
  std::string failure_reason() const;

  nlohmann::json to_json() const;
  std::string to_json_string() const;
};

std::string_view step_name(int step);

/// Certificate verification against trust roots. Holds no clock: every
/// time comparison uses the certificate's SCT timestamp.
class Verifier {
 public:
  Verifier(TrustRoots trust, std::shared_ptr<ledger::LedgerApi> ledger,
           std::shared_ptr<ct::CtLogApi> ct = nullptr);

  // A digest observed earlier; bracket digests must be consistent with it.
  void pin(const ledger::SignedDigest& digest) { pinned_ = digest; }
  const TrustRoots& trust() const { return trust_; }

  VerificationReport verify(const ca::Certificate& cert) const;
  VerificationReport verify(ByteView der) const;

 private:
  TrustRoots trust_;
  std::shared_ptr<ledger::LedgerApi> ledger_;
  std::shared_ptr<ct::CtLogApi> ct_;
  std::optional<ledger::SignedDigest> pinned_;
};

}  // namespace poa::verifier
