#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "relgrade/random.hpp"
#include "relgrade/vectormath.hpp"

using relgrade::EmbeddingVector;

namespace {

EmbeddingVector random_vector(std::mt19937_64& eng, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(relgrade::rng::normal(eng));
  return EmbeddingVector(std::move(v));
}

}  // namespace

static void BM_CosineSimilarity(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 eng(1);
  const auto a = random_vector(eng, dim);
  const auto b = random_vector(eng, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(relgrade::cosine_similarity(a, b));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CosineSimilarity)->Arg(64)->Arg(384)->Arg(1536);

static void BM_Dot(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 eng(2);
  const auto a = random_vector(eng, dim);
  const auto b = random_vector(eng, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(relgrade::dot(a, b));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Dot)->Arg(384);

static void BM_PairFeatures(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 eng(3);
  const auto q = random_vector(eng, dim);
  const auto d = random_vector(eng, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(relgrade::pair_features(q, d));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PairFeatures)->Arg(384);

BENCHMARK_MAIN();
