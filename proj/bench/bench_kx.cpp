// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>

#include "kx/diagram.hpp"
#include "kx/geometry.hpp"
#include "kx/handles.hpp"
#include "kx/normal.hpp"

using namespace kx;

static std::vector<StraightArcPath> random_paths(int n_paths, int len, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> coord(-200, 200);
  std::vector<StraightArcPath> out;
  for (int k = 0; k < n_paths; ++k) {
    StraightArcPath p;
    for (int i = 0; i < len; ++i) p.points.push_back({Q(coord(rng)), Q(coord(rng)), Q(coord(rng))});
    for (int i = 0; i + 1 < len; ++i) p.segment.push_back({i % 2, k % 7, false});
    out.push_back(p);
  }
  return out;
}

static void BM_project_omp(benchmark::State& st) {
  auto paths = random_paths(static_cast<int>(st.range(0)), 20, 7);
  for (auto _ : st) benchmark::DoNotOptimize(project_and_count(paths).total);
}
static void BM_project_serial(benchmark::State& st) {
  auto paths = random_paths(static_cast<int>(st.range(0)), 20, 7);
  for (auto _ : st) benchmark::DoNotOptimize(project_and_count_serial(paths).total);
}
BENCHMARK(BM_project_omp)->Arg(10)->Arg(40);
BENCHMARK(BM_project_serial)->Arg(10)->Arg(40);

static void enumerate_trefoil(benchmark::State& st, bool parallel) {
  Diagram d = braid_closure(2, {1, 1, 1});
  HandleStructure h = build_exterior_handles(d, false);
  NormalSystem s(h);
  EnumOptions opt;
  opt.weight_bound = st.range(0);
  opt.parallel = parallel;
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_admissible(s, opt).size());
}
static void BM_enumerate_omp(benchmark::State& st) { enumerate_trefoil(st, true); }
static void BM_enumerate_serial(benchmark::State& st) { enumerate_trefoil(st, false); }
BENCHMARK(BM_enumerate_omp)->Arg(2)->Arg(4);
BENCHMARK(BM_enumerate_serial)->Arg(2)->Arg(4);

BENCHMARK_MAIN();
