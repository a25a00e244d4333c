#include "commands.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "exit_codes.hpp"
#include "poa/ca/ca_service.hpp"
#include "poa/common/sha256.hpp"
#include "poa/net/clients.hpp"
#include "poa/net/services.hpp"
#include "poa/verifier/bench.hpp"
#include "poa/verifier/games.hpp"
#include "poa/verifier/topology.hpp"
#include "poa/verifier/trust.hpp"
#include "poa/verifier/verifier.hpp"

extern char** environ;

namespace poa::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kConfig, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data, bool secret = false) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kConfig, "cannot write " + path);
  out << data;
  out.close();
  if (secret) fs::permissions(p, fs::perms::owner_read | fs::perms::owner_write);
}

void log_line(const std::string& event, json fields = json::object()) {
  fields["event"] = event;
  std::cerr << fields.dump() << std::endl;
}

std::string key_dir(const Common& common, const Config& cfg) {
  fs::path dir = cfg.get_or("key_dir", "keys");
  if (dir.is_relative() && !common.config_path.empty()) {
    dir = fs::path(common.config_path).parent_path() / dir;
  }
  return dir.string();
}

SigningKey load_or_generate(const Common& common, const Config& cfg, const std::string& name,
                            KeyType type) {
  const std::string path = (fs::path(key_dir(common, cfg)) / (name + ".pem")).string();
  if (fs::exists(path)) return SigningKey::from_pem(read_file(path));
  if (!common.generate) fail(ErrorCode::kConfig, "missing key file " + path + " (use --generate)");
  auto rng = common.rng("key:" + name);
  SigningKey key = type == KeyType::kEd25519 ? SigningKey::generate_ed25519(*rng)
                                             : SigningKey::generate_p256();
  write_file(path, key.private_pem(), true);
  write_file((fs::path(key_dir(common, cfg)) / (name + ".pub.pem")).string(), key.public_key().pem());
  std::cout << "generated " << name << " key " << path << " fingerprint "
            << key.public_key().fingerprint() << std::endl;
  return key;
}

verifier::Profile profile_of(const Config& cfg) {
  return verifier::Profile::by_name(cfg.get_or("profile", "toy"));
}

template <typename F>
auto with_retries(F&& f, int seconds = 20) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(seconds);
  while (true) {
    try {
      return f();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNetwork || std::chrono::steady_clock::now() > deadline) throw;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

ledger::QuorumPolicy fetch_policy(const Config& cfg) {
  ledger::QuorumPolicy policy;
  policy.log_key = with_retries([&] { return net::fetch_service_key(cfg.get("ledger_url")); });
  for (const auto& [id, url] : cfg.get_pairs("witnesses")) {
    policy.witnesses[id] = with_retries([&] { return net::fetch_service_key(url); });
  }
  policy.quorum = static_cast<unsigned>(cfg.get_int("quorum", static_cast<int64_t>(policy.witnesses.size())));
  return policy;
}

// Blocks until SIGINT or SIGTERM. Signals must already be blocked.
void wait_for_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

void block_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

// Binds, serves in the background and waits for a termination signal.
int serve_until_signalled(net::HttpService& svc, const std::string& name, const std::string& url) {
  const HostPort hp = parse_host_port(url);
  const int port = svc.bind(hp.host, hp.port);
  svc.start();
  log_line("listening", {{"service", name}, {"host", hp.host}, {"port", port}});
  wait_for_signal();
  svc.stop();
  log_line("stopped", {{"service", name}});
  return kExitOk;
}

}  // namespace

Config Common::config() const {
  if (config_path.empty()) fail(ErrorCode::kConfig, "--config is required");
  return Config::load(config_path);
}

Clock Common::clock() const {
  if (now) {
    const int64_t t = *now;
    return [t] { return t; };
  }
  return wall_clock();
}

std::shared_ptr<RandomSource> Common::rng(const std::string& purpose) const {
  if (!seed) return std::make_shared<SystemRandom>();
  Bytes material = to_bytes(purpose);
  append_u64_be(material, *seed);
  const Digest32 d = sha256(material);
  return std::make_shared<SeededRandom>(ByteView(d));
}

int cmd_run(const Common& common, const RunOptions& opts) {
  const Config cfg = common.config();
  const Clock clock = common.clock();
  const std::string& s = opts.service;
  block_signals();

  if (s == "idp") {
    const verifier::Profile profile = profile_of(cfg);
    const std::string issuer = cfg.get("issuer");
    auto idp = std::make_shared<idp::IdentityProvider>(issuer, profile.modulus_bits, profile.exponent,
                                                       common.rng("idp"));
    auto svc = net::make_idp_service(idp, clock, issuer);
    // Optional periodic rotation, stopped when the service exits.
    struct Rotator {
      std::mutex mu;
      std::condition_variable cv;
      bool done = false;
      std::thread thread;
      ~Rotator() {
        {
          std::lock_guard lock(mu);
          done = true;
        }
        cv.notify_all();
        if (thread.joinable()) thread.join();
      }
    } rotator;
    const int64_t interval = cfg.get_int("idp.rotation_interval", 0);
    if (interval > 0) {
      rotator.thread = std::thread([&] {
        std::unique_lock lock(rotator.mu);
        while (!rotator.cv.wait_for(lock, std::chrono::seconds(interval), [&] { return rotator.done; })) {
          idp->rotate(clock());
          log_line("rotated", {{"rotation_counter", idp->rotation_counter()}});
        }
      });
    }
    return serve_until_signalled(*svc, "idp", issuer);
  }

  if (s == "ledger") {
    const std::string url = cfg.get("ledger_url");
    auto ledger = std::make_shared<ledger::JwkLedger>(
        load_or_generate(common, cfg, "ledger", KeyType::kEd25519), clock);
    ledger->set_jwks_source(std::make_shared<net::HttpJwksSource>(cfg.get("issuer")));
    for (const auto& [id, wurl] : cfg.get_pairs("witnesses")) {
      ledger->add_witness(std::make_shared<net::HttpWitness>(id, wurl));
    }
    auto svc = net::make_ledger_service(ledger);
    return serve_until_signalled(*svc, "ledger", url);
  }

  if (s == "witness") {
    if (opts.witness_id.empty()) fail(ErrorCode::kConfig, "run witness needs --id");
    std::string url;
    for (const auto& [id, wurl] : cfg.get_pairs("witnesses")) {
      if (id == opts.witness_id) url = wurl;
    }
    if (url.empty()) fail(ErrorCode::kConfig, "witness " + opts.witness_id + " is not in the witnesses list");
    SigningKey key = load_or_generate(common, cfg, "witness-" + opts.witness_id, KeyType::kEd25519);
    const VerifyingKey log_key =
        with_retries([&] { return net::fetch_service_key(cfg.get("ledger_url")); });
    auto witness = std::make_shared<ledger::Witness>(
        opts.witness_id, std::move(key), log_key,
        std::make_shared<net::HttpJwksSource>(cfg.get("issuer")), clock,
        cfg.get_int("witness.skew", 120));
    auto svc = net::make_witness_service(witness);
    return serve_until_signalled(*svc, "witness-" + opts.witness_id, url);
  }

  if (s == "ct") {
    const std::string url = cfg.get("ct_url");
    auto log = std::make_shared<ct::CtLog>(load_or_generate(common, cfg, "ct", KeyType::kEd25519),
                                           [clock] { return clock() * 1000; });
    auto svc = net::make_ct_service(log);
    return serve_until_signalled(*svc, "ct", url);
  }

  if (s == "ca") {
    const std::string url = cfg.get("ca_url");
    SigningKey ca_key = load_or_generate(common, cfg, "ca", KeyType::kEcdsaP256);
    const std::string root_path = (fs::path(key_dir(common, cfg)) / "ca-root.pem").string();
    ca::Certificate root;
    if (fs::exists(root_path)) {
      root = ca::Certificate::from_pem(read_file(root_path));
    } else {
      if (!common.generate) fail(ErrorCode::kConfig, "missing " + root_path + " (use --generate)");
      root = ca::make_root(ca_key, clock() - 86400, 10LL * 365 * 86400, cfg.get_or("ca_id", "poa-ca"));
      write_file(root_path, root.pem());
    }
    ca::CaConfig config;
    config.ca_id = cfg.get_or("ca_id", config.ca_id);
    config.issuer_url = cfg.get("issuer");
    config.cert_lifetime = cfg.get_int("cert_lifetime", config.cert_lifetime);
    config.lambda = profile_of(cfg).lambda;
    config.ledger_policy = fetch_policy(cfg);
    auto ca = std::make_shared<ca::CertificateAuthority>(
        config, std::move(ca_key), root, std::make_shared<net::HttpJwksSource>(config.issuer_url),
        std::make_shared<net::HttpLedger>(cfg.get("ledger_url")),
        std::make_shared<net::HttpCtLog>(cfg.get("ct_url")), common.rng("ca"), clock);
    // Bind before the first poll so a second instance fails fast.
    auto svc = net::make_ca_service(ca);
    const HostPort hp = parse_host_port(url);
    const int port = svc->bind(hp.host, hp.port);
    const ca::PollResult poll = with_retries([&] {
      ca::PollResult p = ca->poll_jwks();
      if (p.degraded) fail(ErrorCode::kNetwork, "identity provider unreachable");
      return p;
    });
    log_line("jwks-recorded", {{"changed", poll.changed}});
    svc->start();
    log_line("listening", {{"service", "ca"}, {"host", hp.host}, {"port", port}});
    wait_for_signal();
    svc->stop();
    log_line("stopped", {{"service", "ca"}});
    return kExitOk;
  }

  fail(ErrorCode::kConfig, "unknown service " + s);
}

int cmd_trust(const Common& common, const std::string& out_path) {
  const Config cfg = common.config();
  verifier::TrustRoots trust;
  trust.ca_root = ca::Certificate::from_pem(net::HttpCa(cfg.get("ca_url")).root_pem());
  const ledger::QuorumPolicy policy = fetch_policy(cfg);
  trust.ledger_key = policy.log_key;
  trust.witness_keys = policy.witnesses;
  trust.quorum = policy.quorum;
  trust.ct_key = net::fetch_service_key(cfg.get("ct_url"));
  trust.expected_issuer = cfg.get("issuer");
  trust.expected_ca_audience = cfg.get_or("ca_id", trust.expected_ca_audience);
  trust.lambda = profile_of(cfg).lambda;
  trust.cert_lifetime = cfg.get_int("cert_lifetime", trust.cert_lifetime);
  trust.validate();
  const std::string text = trust.to_json();
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return kExitOk;
}

int cmd_request(const Common& common, const RequestOptions& opts) {
  const Config cfg = common.config();
  const std::string aud = opts.aud.empty() ? cfg.get_or("ca_id", "poa-ca") : opts.aud;
  const SigningKey key = SigningKey::generate_p256();
  const Bytes spki = key.public_key().der();
  const net::HttpCa ca(cfg.get("ca_url"));
  const Bytes challenge = ca.challenge(spki);

  idp::TokenRequest tr;
  tr.sub = opts.sub;
  tr.aud = aud;
  tr.lifetime = opts.lifetime;
  tr.nonce = hex_encode(challenge);
  const std::string token = net::HttpIdp(cfg.get("issuer")).token(tr);

  ca::IssuanceRequest req;
  req.token = token;
  req.subject_public_key = spki;
  req.challenge = challenge;
  req.proof_of_possession = key.sign(challenge);
  const std::string chain = ca.issue(req);
  if (!opts.key_out.empty()) write_file(opts.key_out, key.private_pem(), true);
  std::cout << chain;
  return kExitOk;
}

int cmd_verify(const Common& common, const VerifyOptions& opts) {
  std::string pem;
  std::string trust_text;
  try {
    pem = opts.cert_path == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                : read_file(opts.cert_path);
    trust_text = read_file(opts.trust_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformedInput;
  }

  ca::Certificate cert;
  verifier::TrustRoots trust;
  try {
    cert = ca::Certificate::from_pem(pem);
  } catch (const Error& e) {
    std::cerr << "error: malformed certificate: " << e.what() << "\n";
    return kExitMalformedInput;
  }
  try {
    trust = verifier::TrustRoots::from_json(trust_text);
  } catch (const Error& e) {
    std::cerr << "error: malformed trust roots: " << e.what() << "\n";
    return kExitMalformedInput;
  }

  std::string ledger_url = opts.ledger_url;
  std::string ct_url = opts.ct_url;
  if (!common.config_path.empty()) {
    const Config cfg = common.config();
    if (ledger_url.empty()) ledger_url = cfg.get_or("ledger_url", "");
    if (ct_url.empty()) ct_url = cfg.get_or("ct_url", "");
  }
  std::shared_ptr<ledger::LedgerApi> ledger;
  std::shared_ptr<ct::CtLogApi> ct;
  if (!ledger_url.empty()) ledger = std::make_shared<net::HttpLedger>(ledger_url);
  if (!ct_url.empty() && !opts.offline) ct = std::make_shared<net::HttpCtLog>(ct_url);

  const verifier::Verifier v(trust, ledger, ct);
  const verifier::VerificationReport report = v.verify(cert);
  std::cout << report.to_json_string();
  return report.accepted ? kExitOk : kExitRejected;
}

int cmd_bench(const Common& common, const BenchOptions& opts) {
  verifier::TopologyOptions topts;
  topts.profile = verifier::Profile::by_name(opts.profile);
  topts.seed = common.seed.value_or(1);
  if (common.now) topts.start_time = *common.now;
  verifier::Topology topo(topts);
  const verifier::BenchReport report = verifier::run_bench(topo, opts.iterations);
  if (opts.format == "text" || opts.format == "both") std::cout << report.to_text();
  if (opts.format == "json" || opts.format == "both") std::cout << report.to_json().dump(2) << "\n";
  return kExitOk;
}

int cmd_games(const Common& common, const GamesOptions& opts) {
  const verifier::GamesSummary summary = verifier::run_games(
      verifier::Profile::by_name(opts.profile), opts.trials, common.seed.value_or(1));
  if (opts.json) {
    std::cout << summary.to_json().dump(2) << "\n";
  } else {
    std::cout << summary.to_text();
  }
  return summary.passed() ? kExitOk : kExitRejected;
}

namespace {

struct Child {
  std::string name;
  pid_t pid = -1;
};

class Supervisor {
 public:
  Supervisor(std::string self, std::string dir) : self_(std::move(self)), dir_(std::move(dir)) {}
  ~Supervisor() { stop_all(); }

  void spawn(const std::string& name, const std::vector<std::string>& args) {
    std::vector<std::string> argv_s = {self_};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    argv.push_back(nullptr);

    const std::string log_path = (fs::path(dir_) / (name + ".log")).string();
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 1, log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&actions, 1, 2);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    sigset_t none;
    sigemptyset(&none);
    posix_spawnattr_setsigmask(&attr, &none);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGMASK);
    pid_t pid = -1;
    const int rc = posix_spawn(&pid, self_.c_str(), &actions, &attr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) throw std::runtime_error("cannot spawn " + name);
    children_.push_back({name, pid});
  }

  // Fails if a child already exited, e.g. because its port was taken.
  void check_alive() {
    for (const auto& c : children_) {
      int status = 0;
      if (waitpid(c.pid, &status, WNOHANG) == c.pid) {
        fail(ErrorCode::kNetwork, c.name + " exited early (see " + c.name + ".log)");
      }
    }
  }

  void stop_all() {
    for (auto it = children_.rbegin(); it != children_.rend(); ++it) kill(it->pid, SIGTERM);
    for (const auto& c : children_) {
      int status = 0;
      waitpid(c.pid, &status, 0);
    }
    children_.clear();
  }

 private:
  std::string self_;
  std::string dir_;
  std::vector<Child> children_;
};

void wait_ready(Supervisor& sup, const std::string& url, const std::string& path) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
  const net::JsonClient client(url);
  while (true) {
    sup.check_alive();
    try {
      client.get_text(path);
      return;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNetwork || std::chrono::steady_clock::now() > deadline) throw;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

}  // namespace

int cmd_demo(const Common& common, const DemoOptions& opts, const std::string& self_exe) {
  const std::string dir = opts.dir.empty() ? (fs::temp_directory_path() / ("poa-demo-" + std::to_string(getpid()))).string()
                                           : opts.dir;
  fs::create_directories(dir);
  auto url = [&](int offset) { return "http://127.0.0.1:" + std::to_string(opts.base_port + offset); };
  std::ostringstream conf;
  conf << "profile = \"" << opts.profile << "\"\n"
       << "issuer = \"" << url(0) << "\"\n"
       << "ledger_url = \"" << url(1) << "\"\n"
       << "ct_url = \"" << url(2) << "\"\n"
       << "ca_url = \"" << url(3) << "\"\n"
       << "witnesses = \"w1=" << url(4) << ",w2=" << url(5) << ",w3=" << url(6) << "\"\n"
       << "quorum = 2\n"
       << "ca_id = \"poa-ca\"\n"
       << "key_dir = \"keys\"\n";
  const std::string config_path = (fs::path(dir) / "demo.toml").string();
  write_file(config_path, conf.str());

  std::vector<std::string> shared = {"--config", config_path, "--generate"};
  if (common.now) {
    shared.push_back("--now");
    shared.push_back(std::to_string(*common.now));
  }
  if (common.seed) {
    shared.push_back("--seed");
    shared.push_back(std::to_string(*common.seed));
  }
  auto run_args = [&](std::vector<std::string> head) {
    head.insert(head.end(), shared.begin(), shared.end());
    return head;
  };

  Supervisor sup(self_exe, dir);
  sup.spawn("idp", run_args({"run", "idp"}));
  wait_ready(sup, url(0), "/jwks");
  sup.spawn("ledger", run_args({"run", "ledger"}));
  wait_ready(sup, url(1), "/key");
  for (int i = 1; i <= 3; ++i) {
    sup.spawn("witness-w" + std::to_string(i), run_args({"run", "witness", "--id", "w" + std::to_string(i)}));
  }
  for (int i = 1; i <= 3; ++i) wait_ready(sup, url(3 + i), "/key");
  sup.spawn("ct", run_args({"run", "ct"}));
  wait_ready(sup, url(2), "/key");
  sup.spawn("ca", run_args({"run", "ca"}));
  wait_ready(sup, url(3), "/root");
  std::cerr << "services up; working directory " << dir << "\n";

  Common client = common;
  client.config_path = config_path;
  const std::string trust_path = (fs::path(dir) / "trust.json").string();
  cmd_trust(client, trust_path);

  RequestOptions req;
  req.sub = "alice@example.com";
  req.key_out = (fs::path(dir) / "requester.pem").string();
  std::streambuf* saved = std::cout.rdbuf();
  std::ostringstream captured;
  std::cout.rdbuf(captured.rdbuf());
  try {
    cmd_request(client, req);
  } catch (...) {
    std::cout.rdbuf(saved);
    throw;
  }
  std::cout.rdbuf(saved);
  const std::string cert_path = (fs::path(dir) / "cert.pem").string();
  write_file(cert_path, captured.str());
  std::cerr << "certificate written to " << cert_path << "\n";

  // Ledger entries are ordered by time, so each rotation needs a later
  // second than the certificate; with a fixed --now rotations are skipped.
  const net::HttpIdp idp(url(0));
  const unsigned rotations = common.now ? 0 : opts.rotations;
  for (unsigned i = 0; i < rotations; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1100));
    idp.rotate();
    net::JsonClient(url(3)).post("/poll", json::object());
  }
  if (rotations > 0) std::cerr << "rotated the identity provider key " << rotations << " times\n";

  VerifyOptions vo;
  vo.cert_path = cert_path;
  vo.trust_path = trust_path;
  const int rc = cmd_verify(client, vo);
  sup.stop_all();
  return rc;
}

}  // namespace poa::cli
