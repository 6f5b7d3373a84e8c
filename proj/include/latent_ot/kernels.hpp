#pragma once

// Data-parallel inner loops of the graph pipelines. Each kernel has a serial
// reference used by the tests and an OpenMP version used by the library.
// Both produce identical output for any thread count.

#include "latent_ot/latent_models.hpp"

#include <span>
#include <vector>

namespace latent_ot::kernels {

using HopTable = Eigen::MatrixXi;
inline constexpr int kUnreachable = -1;

// Random stream ids used for edge sampling: one per source row.
inline constexpr std::uint64_t kEdgeStreamBase = std::uint64_t{1} << 32;

namespace serial {

std::vector<std::vector<int>> radius_neighbors(const Matrix& points, double h);
std::vector<std::vector<int>> bernoulli_edges(const Matrix& points, const NonlocalKernel& kernel,
                                              RngSeed seed);
Matrix kernel_matrix(const Matrix& points, const NonlocalKernel& kernel);
/// Hop counts from every source to every target, kUnreachable when no path.
HopTable multi_source_bfs(const Graph& graph, std::span<const int> sources,
                          std::span<const int> targets);

}  // namespace serial

namespace omp {

std::vector<std::vector<int>> radius_neighbors(const Matrix& points, double h);
std::vector<std::vector<int>> bernoulli_edges(const Matrix& points, const NonlocalKernel& kernel,
                                              RngSeed seed);
Matrix kernel_matrix(const Matrix& points, const NonlocalKernel& kernel);
HopTable multi_source_bfs(const Graph& graph, std::span<const int> sources,
                          std::span<const int> targets);

}  // namespace omp

}  // namespace latent_ot::kernels
