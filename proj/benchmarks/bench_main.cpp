#include <map>

#include <benchmark/benchmark.h>

#include "poa/common/random.hpp"
#include "poa/common/sha256.hpp"
#include "poa/gq/gq_pok.hpp"
#include "poa/idp/idp_sim.hpp"
#include "poa/merkle/merkle.hpp"

namespace {

using namespace poa;

struct Fixture {
  idp::RsaPrivateKey key;
  std::string input = "eyJhbGciOiJSUzI1NiJ9.eyJzdWIiOiJiZW5jaCJ9";
  mpz_class sigma;
};

// One 2048-bit key per exponent, generated on first use.
const Fixture& fixture(unsigned long e) {
  static std::map<unsigned long, Fixture> cache;
  auto it = cache.find(e);
  if (it == cache.end()) {
    SeededRandom rng(e);
    Fixture f;
    f.key = idp::generate_rsa(2048, e, rng);
    f.sigma = f.key.sign_raw(gq::padded_message(f.key.pub, as_bytes(f.input)));
    it = cache.emplace(e, std::move(f)).first;
  }
  return it->second;
}

void BM_Prove(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<unsigned long>(state.range(0)));
  const unsigned lambda = static_cast<unsigned>(state.range(1));
  SeededRandom rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gq::prove(f.key.pub, as_bytes(f.input), f.sigma, lambda, rng));
  }
}
BENCHMARK(BM_Prove)->Args({65537, 128})->Args({65537, 64})->Args({3, 128})->Unit(benchmark::kMillisecond);

void BM_Verify(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<unsigned long>(state.range(0)));
  const unsigned lambda = static_cast<unsigned>(state.range(1));
  SeededRandom rng(7);
  const gq::GqProof proof = gq::prove(f.key.pub, as_bytes(f.input), f.sigma, lambda, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gq::verify_proof(f.key.pub, as_bytes(f.input), proof, lambda));
  }
}
BENCHMARK(BM_Verify)->Args({65537, 128})->Args({65537, 64})->Args({3, 128})->Unit(benchmark::kMillisecond);

void BM_ProofDecode(benchmark::State& state) {
  const Fixture& f = fixture(65537);
  SeededRandom rng(7);
  const Bytes wire = gq::prove(f.key.pub, as_bytes(f.input), f.sigma, 128, rng).encode();
  for (auto _ : state) benchmark::DoNotOptimize(gq::GqProof::decode(wire));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * wire.size()));
}
BENCHMARK(BM_ProofDecode);

void BM_MerkleAppend(benchmark::State& state) {
  const auto n = static_cast<uint64_t>(state.range(0));
  for (auto _ : state) {
    merkle::Tree tree;
    for (uint64_t i = 0; i < n; ++i) {
      Bytes leaf;
      append_u64_be(leaf, i);
      tree.append(merkle::leaf_hash(leaf));
    }
    benchmark::DoNotOptimize(tree.root());
  }
}
BENCHMARK(BM_MerkleAppend)->Arg(1024)->Arg(16384);

void BM_MerkleProveVerify(benchmark::State& state) {
  const auto n = static_cast<uint64_t>(state.range(0));
  merkle::Tree tree;
  for (uint64_t i = 0; i < n; ++i) {
    Bytes leaf;
    append_u64_be(leaf, i);
    tree.append(merkle::leaf_hash(leaf));
  }
  const Digest32 root = tree.root();
  uint64_t i = 0;
  for (auto _ : state) {
    const uint64_t index = (i++ * 7919) % n;
    const auto proof = tree.prove_inclusion(index, n);
    benchmark::DoNotOptimize(merkle::verify_inclusion(tree.leaf(index), proof, root));
  }
}
BENCHMARK(BM_MerkleProveVerify)->Arg(1024)->Arg(1 << 20);

}  // namespace
BENCHMARK_MAIN();
