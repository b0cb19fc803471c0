#include <benchmark/benchmark.h>

#include <random>
#include <set>

#include "labelset/annotator.hpp"
#include "labelset/clustering.hpp"
#include "labelset/features.hpp"
#include "labelset/lsh.hpp"
#include "labelset/segmenter.hpp"
#include "labelset/synthetic.hpp"

namespace {

using namespace labelset;

void BM_RegionFeatures(benchmark::State& state) {
  const SyntheticConfig cfg;
  const auto image = render_synthetic_image(cfg, 0, false, 11).pixels;
  const auto regions = make_segmenter({})->segment(image, "bench");
  for (auto _ : state)
    for (const auto& r : regions) benchmark::DoNotOptimize(region_features(image, r));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(regions.size()));
}
BENCHMARK(BM_RegionFeatures);

void BM_GlobalFeatures(benchmark::State& state) {
  const SyntheticConfig cfg;
  const auto image = render_synthetic_image(cfg, 1, true, 12).pixels;
  for (auto _ : state) benchmark::DoNotOptimize(global_features(image, "bench", {}));
}
BENCHMARK(BM_GlobalFeatures);

void BM_Bucketize(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<RegionFeature> regions(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < regions.size(); ++i) {
    regions[i].region_id = "r" + std::to_string(i);
    regions[i].values.resize(kRegionFeatureDim);
    for (auto& v : regions[i].values) v = u(rng);
  }
  const Hasher h = build_hasher({kRegionFeatureDim, 8, 0.25, 7});
  for (auto _ : state) benchmark::DoNotOptimize(bucketize(h, regions));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bucketize)->Arg(1000)->Arg(16000);

void BM_AffinityPropagation(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<FeatureVector> pts(static_cast<std::size_t>(state.range(0)), FeatureVector(kRegionFeatureDim));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(affinity_propagation(pts));
}
BENCHMARK(BM_AffinityPropagation)->Arg(50)->Arg(200);

void BM_AveragePrecision(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  RankedScores scores;
  std::set<std::string> relevant;
  for (int i = 0; i < state.range(0); ++i) {
    scores.emplace_back("t" + std::to_string(i), u(rng));
    if (u(rng) < 0.1) relevant.insert(scores.back().first);
  }
  for (auto _ : state) benchmark::DoNotOptimize(average_precision(scores, relevant));
}
BENCHMARK(BM_AveragePrecision)->Arg(800);

}  // namespace

BENCHMARK_MAIN();
