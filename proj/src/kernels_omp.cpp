#include "kernels_detail.hpp"

#include <omp.h>

namespace latent_ot::kernels::omp {

std::vector<std::vector<int>> radius_neighbors(const Matrix& points, double h) {
  const Eigen::Index n = points.rows();
  std::vector<std::vector<int>> upper(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    upper[i] = detail::upper_neighbors(points, i, h);
  }
  return detail::symmetrize(upper);
}

std::vector<std::vector<int>> bernoulli_edges(const Matrix& points, const NonlocalKernel& kernel,
                                              RngSeed seed) {
  const Eigen::Index n = points.rows();
  std::vector<std::vector<int>> upper(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    upper[i] = detail::upper_bernoulli(points, kernel, seed, i);
  }
  return detail::symmetrize(upper);
}

Matrix kernel_matrix(const Matrix& points, const NonlocalKernel& kernel) {
  const Eigen::Index n = points.rows();
  Matrix w(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) w(i, j) = detail::kernel_entry(points, kernel, i, j);
  }
  return w;
}

HopTable multi_source_bfs(const Graph& graph, std::span<const int> sources,
                          std::span<const int> targets) {
  HopTable hops(sources.size(), targets.size());
  const auto count = static_cast<std::ptrdiff_t>(sources.size());
#pragma omp parallel
  {
    std::vector<int> dist(graph.node_count), queue;
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t s = 0; s < count; ++s) {
      detail::bfs(graph, sources[s], dist, queue);
      for (std::size_t t = 0; t < targets.size(); ++t) hops(s, t) = dist[targets[t]];
    }
  }
  return hops;
}

}  // namespace latent_ot::kernels::omp
