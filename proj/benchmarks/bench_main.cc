#include <benchmark/benchmark.h>

#include <numbers>

#include "fockqkd/attack.h"
#include "fockqkd/discrimination.h"
#include "fockqkd/sources.h"

using namespace fockqkd;

namespace {

SourceParams make(SourceKind kind, double amplitude) {
  SourceParams p;
  p.kind = kind;
  p.amplitude = amplitude;
  return p;
}

void BM_RotateModes(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  FockVector v(4, n);
  for (const auto& p : enumerate_patterns(4, n)) v.add(p, 1.0 / (1 + p.total()));
  for (auto _ : state) benchmark::DoNotOptimize(rotate_modes(v, 0, 1, std::numbers::pi / 4));
  state.counters["terms"] = static_cast<double>(v.terms().size());
}
BENCHMARK(BM_RotateModes)->DenseRange(2, 6, 2);

void BM_ModifiedSingletMeasure(benchmark::State& state) {
  const FockVector pair = pdc_modified_singlet(make(SourceKind::kPdc, 0.1));
  for (auto _ : state) benchmark::DoNotOptimize(alice_measure(pair, Basis::kDiagonal, 0.8));
}
BENCHMARK(BM_ModifiedSingletMeasure);

void BM_UsdPovmEqual(benchmark::State& state) {
  std::vector<FockVector> kets;
  for (const auto& q : signal_states(make(SourceKind::kWcp, 0.3))) kets.push_back(q.state);
  const StateEnsemble e = StateEnsemble::uniform(kets);
  for (auto _ : state) benchmark::DoNotOptimize(usd_povm_equal(e));
}
BENCHMARK(BM_UsdPovmEqual);

void BM_CriticalTransmission(benchmark::State& state) {
  const SourceParams s = make(SourceKind::kWcp, 0.316227766016838);
  for (auto _ : state) benchmark::DoNotOptimize(critical_transmission(s, 1.0));
}
BENCHMARK(BM_CriticalTransmission);

void BM_MonteCarlo(benchmark::State& state) {
  ProtocolConfig c;
  c.source = make(SourceKind::kWcp, 0.3);
  c.channel.transmission = 0.1;
  c.pulses = 100000;
  const Attack attack = state.range(0) ? Attack::kConclusive : Attack::kNone;
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol_monte_carlo(c, attack));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * c.pulses));
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
