#include "kernels_detail.hpp"

namespace latent_ot::kernels::serial {

std::vector<std::vector<int>> radius_neighbors(const Matrix& points, double h) {
  std::vector<std::vector<int>> lists(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      if ((points.row(i) - points.row(j)).norm() <= h) {
        lists[i].push_back(static_cast<int>(j));
        lists[j].push_back(static_cast<int>(i));
      }
    }
  }
  return lists;
}

std::vector<std::vector<int>> bernoulli_edges(const Matrix& points, const NonlocalKernel& kernel,
                                              RngSeed seed) {
  std::vector<std::vector<int>> upper(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    upper[i] = detail::upper_bernoulli(points, kernel, seed, i);
  }
  return detail::symmetrize(upper);
}

Matrix kernel_matrix(const Matrix& points, const NonlocalKernel& kernel) {
  const Eigen::Index n = points.rows();
  Matrix w(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) w(i, j) = detail::kernel_entry(points, kernel, i, j);
  }
  return w;
}

HopTable multi_source_bfs(const Graph& graph, std::span<const int> sources,
                          std::span<const int> targets) {
  HopTable hops(sources.size(), targets.size());
  std::vector<int> dist(graph.node_count), queue;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    detail::bfs(graph, sources[s], dist, queue);
    for (std::size_t t = 0; t < targets.size(); ++t) hops(s, t) = dist[targets[t]];
  }
  return hops;
}

}  // namespace latent_ot::kernels::serial
