// Serial reference vs OpenMP kernels on the graph pipelines' hot loops.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include "latent_ot/kernels.hpp"
#include "latent_ot/latent_models.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

namespace {

using namespace latent_ot;

LatentConfiguration sphere_latents(int node_count) {
  return sample_latents(ManifoldSpec::sphere(), DensitySpec::uniform(), 20, 20, node_count,
                        RngSeed{7});
}

LatentConfiguration square_latents(int node_count) {
  return sample_latents(ManifoldSpec::unit_square(), DensitySpec::uniform(), node_count / 3,
                        node_count - node_count / 3, node_count, RngSeed{7});
}

template <auto Kernel>
void radius_neighbors(benchmark::State& state) {
  const auto latents = sphere_latents(static_cast<int>(state.range(0)));
  const double h = h_schedule(static_cast<int>(state.range(0)), 2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(latents.points, h));
}

template <auto Kernel>
void bernoulli_edges(benchmark::State& state) {
  const auto latents = square_latents(static_cast<int>(state.range(0)));
  const auto kernel = NonlocalKernel::gaussian(2.0, 0.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(latents.points, kernel, RngSeed{3}));
}

template <auto Kernel>
void kernel_matrix(benchmark::State& state) {
  const auto latents = square_latents(static_cast<int>(state.range(0)));
  const auto kernel = NonlocalKernel::gaussian(2.0, 0.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(latents.points, kernel));
}

template <auto Kernel>
void multi_source_bfs(benchmark::State& state) {
  const int node_count = static_cast<int>(state.range(0));
  const auto latents = sphere_latents(node_count);
  const Graph graph = eps_graph(latents, h_schedule(node_count, 2, 1.0));
  std::vector<int> sources(20), targets(20);
  std::iota(sources.begin(), sources.end(), 0);
  std::iota(targets.begin(), targets.end(), 20);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(graph, sources, targets));
}

namespace k = latent_ot::kernels;

BENCHMARK(radius_neighbors<k::serial::radius_neighbors>)->Name("radius_neighbors/serial")->Arg(1000)->Arg(3000)->Arg(10000);
BENCHMARK(radius_neighbors<k::omp::radius_neighbors>)->Name("radius_neighbors/omp")->Arg(1000)->Arg(3000)->Arg(10000);
BENCHMARK(bernoulli_edges<k::serial::bernoulli_edges>)->Name("bernoulli_edges/serial")->Arg(400)->Arg(1600);
BENCHMARK(bernoulli_edges<k::omp::bernoulli_edges>)->Name("bernoulli_edges/omp")->Arg(400)->Arg(1600);
BENCHMARK(kernel_matrix<k::serial::kernel_matrix>)->Name("kernel_matrix/serial")->Arg(400)->Arg(1600);
BENCHMARK(kernel_matrix<k::omp::kernel_matrix>)->Name("kernel_matrix/omp")->Arg(400)->Arg(1600);
BENCHMARK(multi_source_bfs<k::serial::multi_source_bfs>)->Name("multi_source_bfs/serial")->Arg(3000)->Arg(10000);
BENCHMARK(multi_source_bfs<k::omp::multi_source_bfs>)->Name("multi_source_bfs/omp")->Arg(3000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
