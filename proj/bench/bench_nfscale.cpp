#include <filesystem>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "nfscale/kernels.hpp"
#include "nfscale/report.hpp"

namespace {

using namespace nfscale;

std::vector<SessionKey> random_keys(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<SessionKey> keys(n);
  for (auto& k : keys) {
    const auto a = Endpoint::v4(static_cast<std::uint32_t>(rng()), static_cast<std::uint16_t>(1 + rng() % 65535));
    const auto b = Endpoint::v4(static_cast<std::uint32_t>(rng()), static_cast<std::uint16_t>(1 + rng() % 65535));
    k = canonical_key(a, b);
  }
  return keys;
}

BucketVector three_chains() {
  const Allocation alloc{{ChainId(2, 3), 342}, {ChainId(4, 5), 341}, {ChainId(6, 7), 341}};
  return build_buckets(alloc, HashParams{}, 1);
}

template <bool Parallel>
void BM_lookup_batch(benchmark::State& state) {
  const auto keys = random_keys(static_cast<std::size_t>(state.range(0)));
  const auto bv = three_chains();
  std::vector<ChainId> out(keys.size());
  for (auto _ : state) {
    if constexpr (Parallel) lookup_batch(bv, keys, out);
    else lookup_batch_serial(bv, keys, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_lookup_batch<true>)->Arg(1 << 20);
BENCHMARK(BM_lookup_batch<false>)->Arg(1 << 20);

template <bool Parallel>
void BM_slot_histogram(benchmark::State& state) {
  const auto keys = random_keys(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto h = Parallel ? slot_histogram(keys, 1024) : slot_histogram_serial(keys, 1024);
    benchmark::DoNotOptimize(h.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_slot_histogram<true>)->Arg(1 << 20);
BENCHMARK(BM_slot_histogram<false>)->Arg(1 << 20);

template <bool Parallel>
void BM_chain_share(benchmark::State& state) {
  const auto keys = random_keys(static_cast<std::size_t>(state.range(0)));
  const auto bv = three_chains();
  for (auto _ : state) {
    auto s = Parallel ? chain_share(bv, keys) : chain_share_serial(bv, keys);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_chain_share<true>)->Arg(1 << 20);
BENCHMARK(BM_chain_share<false>)->Arg(1 << 20);

void BM_run_static3(benchmark::State& state) {
  const auto f = bundled_scenario("static-3");
  for (auto _ : state) {
    auto r = run(f.scenario);
    benchmark::DoNotOptimize(r.counters);
  }
}
BENCHMARK(BM_run_static3)->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_replicate(benchmark::State& state) {
  const auto dir = std::filesystem::temp_directory_path() / "nfscale_bench_replicate";
  SuiteOptions o;
  o.parallel = Parallel;
  o.only = {"static-1", "static-2", "static-3", "warmup-1to2", "cooldown-3to2"};
  for (auto _ : state) {
    auto s = replicate_suite(dir, o);
    benchmark::DoNotOptimize(s.runs.data());
  }
  std::filesystem::remove_all(dir);
}
BENCHMARK(BM_replicate<true>)->Unit(benchmark::kSecond)->Iterations(1);
BENCHMARK(BM_replicate<false>)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
