#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "config.hpp"
#include "poa/common/clock.hpp"
#include "poa/common/random.hpp"

namespace poa::cli {

struct Common {
  std::string config_path;
  std::optional<int64_t> now;
  std::optional<uint64_t> seed;
  bool generate = false;

  Config config() const;
  Clock clock() const;
  std::shared_ptr<RandomSource> rng(const std::string& purpose) const;
};

struct RunOptions {
  std::string service;
  std::string witness_id;
};

struct RequestOptions {
  std::string sub;
  std::string aud;
  std::string key_out;
  int64_t lifetime = 600;
};

struct VerifyOptions {
  std::string cert_path;
  std::string trust_path;
  std::string ledger_url;
  std::string ct_url;
  bool offline = false;
};

struct BenchOptions {
  std::string profile = "default";
  unsigned iterations = 5;
  std::string format = "both";
};

struct GamesOptions {
  std::string profile = "toy";
  uint64_t trials = 100;
  bool json = false;
};

struct DemoOptions {
  std::string dir;
  std::string profile = "toy";
  int base_port = 18080;
  unsigned rotations = 0;
};

int cmd_run(const Common& common, const RunOptions& opts);
int cmd_trust(const Common& common, const std::string& out_path);
int cmd_request(const Common& common, const RequestOptions& opts);
int cmd_verify(const Common& common, const VerifyOptions& opts);
int cmd_bench(const Common& common, const BenchOptions& opts);
int cmd_games(const Common& common, const GamesOptions& opts);
int cmd_demo(const Common& common, const DemoOptions& opts, const std::string& self_exe);

}  // namespace poa::cli
