#include <memory>

#include <benchmark/benchmark.h>

#include "learn/budget_scheduler.hpp"
#include "learn/centroid.hpp"
#include "learn/dataset_store.hpp"
#include "learn/domain_selector.hpp"
#include "learn/mme.hpp"
#include "learn/protocol_config.hpp"
#include "learn/synthetic.hpp"

namespace {

using namespace learn;

const std::vector<DatasetHandle>& benchmark_domains() {
  static const auto domains = generate_synthetic_domains(standard_benchmark_spec(0, 1.0));
  return domains;
}

void BM_CentroidPredict(benchmark::State& state) {
  const auto& ds = benchmark_domains();
  auto rng = derive_stream(0, {"bench"});
  const auto model = centroid_fit(fully_labeled_pool(ds[0]), 5, CentroidOptions{}, rng);
  const auto& test = ds[1].test_set();
  for (auto _ : state) {
    for (const auto& s : test) benchmark::DoNotOptimize(centroid_predict(model, s.features()));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(test.size()));
}
BENCHMARK(BM_CentroidPredict);

void BM_CentroidTune(benchmark::State& state) {
  const auto pool = fully_labeled_pool(benchmark_domains()[0]);
  for (auto _ : state) {
    auto rng = derive_stream(0, {"bench"});
    benchmark::DoNotOptimize(centroid_tune(pool, 5, CentroidOptions{}, rng));
  }
}
BENCHMARK(BM_CentroidTune);

void BM_MmeStep(benchmark::State& state) {
  const auto& ds = benchmark_domains();
  const auto source = fully_labeled_pool(ds[0]);
  const auto model = mme_init(source, 5, MmeOptions{});
  const auto target = fully_labeled_pool(ds[1]);
  const auto labeled_count = static_cast<std::size_t>(state.range(0));
  const std::vector<LabeledExample> labeled(target.begin(), target.begin() + static_cast<long>(labeled_count));
  std::vector<UnlabeledExample> unlabeled;
  for (std::size_t i = labeled_count; i < target.size(); ++i) unlabeled.push_back({target[i].id, target[i].features});
  for (auto _ : state) benchmark::DoNotOptimize(mme_step(model, labeled, unlabeled));
}
BENCHMARK(BM_MmeStep)->Arg(5)->Arg(50)->Arg(250);

void BM_BuildSchedule(benchmark::State& state) {
  const std::vector<std::size_t> seeds{1, 2, 5, 10}, labels{50, 125, 250, 500};
  for (auto _ : state) benchmark::DoNotOptimize(build_schedule(seeds, labels, 5, 500));
}
BENCHMARK(BM_BuildSchedule);

void BM_SelectSource(benchmark::State& state) {
  const auto& ds = benchmark_domains();
  DatasetRegistry reg;
  for (const auto& d : ds) reg.add(std::make_shared<const DatasetHandle>(d));
  const std::vector<std::string> whitelist{"source", "target_adapt"};
  for (auto _ : state) benchmark::DoNotOptimize(select_source(ds[1], reg, whitelist));
}
BENCHMARK(BM_SelectSource);

}  // namespace

BENCHMARK_MAIN();
