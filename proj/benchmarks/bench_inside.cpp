#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "oracle.hpp"
#include "treecrf/decode.hpp"
#include "treecrf/inside.hpp"

using namespace treecrf;

namespace {

struct Batch {
  std::vector<ArcScores> arcs;
  std::vector<SibScores> sibs;
};

Batch make_batch(int b, int n) {
  std::mt19937_64 rng(7);
  Batch out;
  for (int k = 0; k < b; ++k) {
    out.arcs.push_back(testing::random_arcs(n, rng));
    out.sibs.push_back(testing::random_sibs(n, rng));
  }
  return out;
}

void BM_InsideFirstBatched(benchmark::State& state) {
  const Batch batch = make_batch(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(inside_first_order(batch.arcs));
}

void BM_InsideFirstNaive(benchmark::State& state) {
  const Batch batch = make_batch(state.range(0), state.range(1));
  for (auto _ : state)
    for (const auto& a : batch.arcs) benchmark::DoNotOptimize(testing::naive_inside(a, RootPolicy::kSingle));
}

void BM_InsideSecond(benchmark::State& state) {
  const Batch batch = make_batch(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(inside_second_order(batch.arcs, batch.sibs));
}

void BM_Marginals(benchmark::State& state) {
  const Batch batch = make_batch(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(batch_marginals(batch.arcs, batch.sibs));
}

void BM_Eisner1(benchmark::State& state) {
  const Batch batch = make_batch(1, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eisner1(batch.arcs[0]));
}

void BM_Eisner2(benchmark::State& state) {
  const Batch batch = make_batch(1, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eisner2(batch.arcs[0], batch.sibs[0]));
}

}  // namespace

BENCHMARK(BM_InsideFirstBatched)->Args({32, 10})->Args({32, 30})->Args({32, 60});
BENCHMARK(BM_InsideFirstNaive)->Args({32, 10})->Args({32, 30})->Args({32, 60});
BENCHMARK(BM_InsideSecond)->Args({32, 10})->Args({32, 30});
BENCHMARK(BM_Marginals)->Args({32, 30});
BENCHMARK(BM_Eisner1)->Arg(30)->Arg(60);
BENCHMARK(BM_Eisner2)->Arg(30)->Arg(60);
BENCHMARK_MAIN();
