#include <benchmark/benchmark.h>

#include "ptbcc/baselines.hpp"
#include "ptbcc/inference.hpp"
#include "ptbcc/synthetic.hpp"

namespace {

ptbcc::Dataset make_dataset(std::size_t tasks, std::size_t classes = 5) {
  auto cfg = ptbcc::SyntheticConfig::symmetric(tasks, 100, classes, 5, {{20.0, 1.0}, {10.0, 10.0}});
  cfg.beta = {0.3, 0.1};
  return ptbcc::generate_synthetic(cfg, 1).dataset;
}

void BM_Sweep(benchmark::State& state) {
  const auto d = make_dataset(static_cast<std::size_t>(state.range(0)));
  ptbcc::Hyperparams hp;
  hp.num_prototypes = static_cast<std::size_t>(state.range(1));
  ptbcc::VariationalEngine engine(d, hp);
  for (auto _ : state) benchmark::DoNotOptimize(engine.sweep());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * d.num_annotations()));
}
BENCHMARK(BM_Sweep)->ArgsProduct({{2000, 4000, 8000, 16000}, {2, 4}})->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  const auto d = make_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ptbcc::fit(d, ptbcc::Hyperparams{}).iterations);
}
BENCHMARK(BM_Fit)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_MajorityVote(benchmark::State& state) {
  const auto d = make_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ptbcc::majority_vote(d).predictions.data());
}
BENCHMARK(BM_MajorityVote)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_DawidSkene(benchmark::State& state) {
  const auto d = make_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ptbcc::dawid_skene(d).iterations);
}
BENCHMARK(BM_DawidSkene)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
