#include <unistd.h>

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "exit_codes.hpp"
#include "poa/ca/ca_service.hpp"

namespace {

std::string self_exe(const char* argv0) {
  std::error_code ec;
  const auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::string(argv0) : p.string();
}

void add_common(CLI::App* cmd, poa::cli::Common& common, bool with_config = true) {
  if (with_config) cmd->add_option("--config", common.config_path, "key/value config file");
  cmd->add_option("--now", common.now, "fixed clock, Unix seconds");
  cmd->add_option("--seed", common.seed, "seed for reproducible keys and randomness");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace poa::cli;

  CLI::App app{"poa: token-bound certificates with proofs of knowledge of IdP signatures"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Common common;

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run one service until SIGINT/SIGTERM");
  run_cmd->add_option("service", run.service, "idp | ca | ledger | ct | witness")
      ->required()
      ->check(CLI::IsMember({"idp", "ca", "ledger", "ct", "witness"}));
  run_cmd->add_option("--id", run.witness_id, "witness id (run witness)");
  run_cmd->add_flag("--generate", common.generate, "create missing key files");
  add_common(run_cmd, common);

  std::string trust_out;
  auto* trust_cmd = app.add_subcommand("trust", "assemble trust roots from running services");
  trust_cmd->add_option("--out,-o", trust_out, "output file (default stdout)");
  add_common(trust_cmd, common);

  RequestOptions request;
  auto* request_cmd = app.add_subcommand("request", "obtain a certificate; PEM chain on stdout");
  request_cmd->add_option("--sub", request.sub, "subject identity")->required();
  request_cmd->add_option("--aud", request.aud, "token audience (default: ca_id)");
  request_cmd->add_option("--key-out", request.key_out, "where to write the requester private key");
  request_cmd->add_option("--lifetime", request.lifetime, "token lifetime, seconds");
  add_common(request_cmd, common);

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "verify a certificate; report JSON on stdout");
  verify_cmd->add_option("--cert", verify.cert_path, "certificate PEM ('-' for stdin)")->required();
  verify_cmd->add_option("--trust", verify.trust_path, "trust roots JSON")->required();
  verify_cmd->add_option("--ledger", verify.ledger_url, "JWK ledger URL");
  verify_cmd->add_option("--ct", verify.ct_url, "CT log URL for the inclusion check");
  verify_cmd->add_flag("--offline", verify.offline, "skip the CT inclusion check");
  add_common(verify_cmd, common);

  BenchOptions bench;
  bool bench_toy = false;
  auto* bench_cmd = app.add_subcommand("bench", "proof and certificate sizes and timings");
  bench_cmd->add_option("--profile", bench.profile, "toy | default")->check(CLI::IsMember({"toy", "default"}));
  bench_cmd->add_flag("--toy", bench_toy, "same as --profile toy");
  bench_cmd->add_option("--iterations", bench.iterations, "runs per timing (median)");
  bench_cmd->add_option("--format", bench.format, "text | json | both")
      ->check(CLI::IsMember({"text", "json", "both"}));
  add_common(bench_cmd, common, false);

  GamesOptions games;
  auto* games_cmd = app.add_subcommand("games", "run the security games in process");
  games_cmd->add_option("--trials", games.trials, "trials per game");
  games_cmd->add_option("--profile", games.profile, "toy | default")->check(CLI::IsMember({"toy", "default"}));
  games_cmd->add_flag("--json", games.json, "JSON summary instead of text");
  add_common(games_cmd, common, false);

  DemoOptions demo;
  bool demo_toy = false;
  auto* demo_cmd = app.add_subcommand("demo", "start every service, request and verify a certificate");
  demo_cmd->add_option("--dir", demo.dir, "working directory for config, keys and logs");
  demo_cmd->add_option("--profile", demo.profile, "toy | default")->check(CLI::IsMember({"toy", "default"}));
  demo_cmd->add_flag("--toy", demo_toy, "same as --profile toy");
  demo_cmd->add_option("--base-port", demo.base_port, "first of seven consecutive ports");
  demo_cmd->add_option("--rotations", demo.rotations, "IdP rotations between issuance and verification");
  add_common(demo_cmd, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadConfig;
  }
  if (bench_toy) bench.profile = "toy";
  if (demo_toy) demo.profile = "toy";

  try {
    if (*run_cmd) return cmd_run(common, run);
    if (*trust_cmd) return cmd_trust(common, trust_out);
    if (*request_cmd) return cmd_request(common, request);
    if (*verify_cmd) return cmd_verify(common, verify);
    if (*bench_cmd) return cmd_bench(common, bench);
    if (*games_cmd) return cmd_games(common, games);
    if (*demo_cmd) return cmd_demo(common, demo, self_exe(argv[0]));
  } catch (const poa::ca::IssuanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const poa::Error& e) {
    std::cerr << "error: " << poa::to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
