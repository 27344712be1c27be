#include <benchmark/benchmark.h>

#include <cstdio>
#include <memory>
#include <random>
#include <vector>

#include "relgrade/index.hpp"
#include "relgrade/random.hpp"
#include "relgrade/vectormath.hpp"

using relgrade::BruteForceIndex;
using relgrade::EmbeddingVector;
using relgrade::HnswIndex;
using relgrade::HnswParams;

namespace {

constexpr std::size_t kDim = 64;
constexpr std::size_t kCorpus = 2000;

EmbeddingVector random_vector(std::mt19937_64& eng, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(relgrade::rng::normal(eng));
  return EmbeddingVector(std::move(v));
}

std::string doc_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "doc-%05zu", i);
  return buf;
}

const std::vector<EmbeddingVector>& corpus() {
  static const auto vecs = [] {
    std::mt19937_64 eng(101);
    std::vector<EmbeddingVector> out;
    out.reserve(kCorpus);
    for (std::size_t i = 0; i < kCorpus; ++i) out.push_back(random_vector(eng, kDim));
    return out;
  }();
  return vecs;
}

const BruteForceIndex& brute_force() {
  static const auto index = [] {
    auto idx = std::make_unique<BruteForceIndex>(kDim);
    for (std::size_t i = 0; i < kCorpus; ++i) idx->insert(doc_id(i), corpus()[i]);
    return idx;
  }();
  return *index;
}

const HnswIndex& hnsw() {
  static const auto index = [] {
    auto idx = std::make_unique<HnswIndex>(kDim, HnswParams{.seed = 9});
    for (std::size_t i = 0; i < kCorpus; ++i) idx->insert(doc_id(i), corpus()[i]);
    return idx;
  }();
  return *index;
}

}  // namespace

static void BM_BruteForceSearch(benchmark::State& state) {
  std::mt19937_64 eng(7);
  const auto q = random_vector(eng, kDim);
  const auto& index = brute_force();
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.search(q, 10));
  }
}
BENCHMARK(BM_BruteForceSearch);

static void BM_HnswSearch(benchmark::State& state) {
  const auto ef = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 eng(7);
  const auto q = random_vector(eng, kDim);
  const auto& index = hnsw();
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.search(q, 10, ef));
  }
}
BENCHMARK(BM_HnswSearch)->Arg(50)->Arg(100)->Arg(200);

static void BM_HnswBuild(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    HnswIndex index(kDim, HnswParams{.seed = 9});
    for (std::size_t i = 0; i < n; ++i) index.insert(doc_id(i), corpus()[i]);
    benchmark::DoNotOptimize(index);
  }
}
BENCHMARK(BM_HnswBuild)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
