#include <benchmark/benchmark.h>

#include <random>

#include "cbaa/distributed.hpp"
#include "cbaa/recovery.hpp"
#include "cbaa/trace.hpp"
#include "cbaa/update.hpp"

using namespace cbaa;

namespace {

std::vector<IpPair> pairs_for(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<IpPair> out(n);
  for (auto& p : out) p = {static_cast<std::uint32_t>(rng() % 100000), static_cast<std::uint32_t>(rng())};
  return out;
}

// Default 128 MiB cube loaded with a planted-host trace.
const CubeOfBitsArrays& loaded_cube() {
  static const CubeOfBitsArrays cube = [] {
    SynthSpec spec;
    spec.planted = {{50, {2048, 16384}}};
    spec.backgroundHosts = 20000;
    CubeOfBitsArrays c(default_config());
    record_stream(c, to_pairs(synth_trace(spec).records));
    return c;
  }();
  return cube;
}

void BM_RecordStream(benchmark::State& state) {
  const auto pairs = pairs_for(1 << 20);
  CubeOfBitsArrays cube(default_config());
  for (auto _ : state) record_stream(cube, pairs, {static_cast<unsigned>(state.range(0)), StreamOptions{}.batchSize});
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs.size()));
}
BENCHMARK(BM_RecordStream)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_RecoverAll(benchmark::State& state) {
  const auto& cube = loaded_cube();
  RecoveryOptions o;
  o.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(recover_all(cube, o));
}
BENCHMARK(BM_RecoverAll)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_Merge(benchmark::State& state) {
  const auto& src = loaded_cube();
  CubeOfBitsArrays dst(default_config());
  for (auto _ : state) dst.merge_from(src);
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(src.bit_count() / 8));
}
BENCHMARK(BM_Merge)->Unit(benchmark::kMillisecond);

void BM_Serialize(benchmark::State& state) {
  const auto& cube = loaded_cube();
  for (auto _ : state) benchmark::DoNotOptimize(serialize(cube));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(cube.bit_count() / 8));
}
BENCHMARK(BM_Serialize)->Unit(benchmark::kMillisecond);

void BM_Deserialize(benchmark::State& state) {
  const auto bytes = serialize(loaded_cube());
  for (auto _ : state) benchmark::DoNotOptimize(deserialize(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_Deserialize)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
