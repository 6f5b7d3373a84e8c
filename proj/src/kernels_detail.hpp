#pragma once

// Per-row work shared by the serial and OpenMP kernels.

#include "latent_ot/kernels.hpp"

#include <deque>

namespace latent_ot::kernels::detail {

// Neighbors j > i within distance h.
inline std::vector<int> upper_neighbors(const Matrix& points, Eigen::Index i, double h) {
  std::vector<int> row;
  for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
    if ((points.row(i) - points.row(j)).norm() <= h) row.push_back(static_cast<int>(j));
  }
  return row;
}

// Edges (i, j), j > i, drawn from row i's own stream.
inline std::vector<int> upper_bernoulli(const Matrix& points, const NonlocalKernel& kernel,
                                        RngSeed seed, Eigen::Index i) {
  auto rng = Xoshiro256::for_stream(seed, kEdgeStreamBase + static_cast<std::uint64_t>(i));
  std::vector<int> row;
  const Point zi = points.row(i).transpose();
  for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
    const double prob = kernel.rho * kernel.evaluate(zi, points.row(j).transpose());
    if (rng.uniform() < prob) row.push_back(static_cast<int>(j));
  }
  return row;
}

// Symmetrizes upper-triangular rows into sorted neighbor lists.
inline std::vector<std::vector<int>> symmetrize(const std::vector<std::vector<int>>& upper) {
  std::vector<std::vector<int>> lists(upper.size());
  for (std::size_t i = 0; i < upper.size(); ++i) {
    for (int j : upper[i]) {
      lists[i].push_back(j);
      lists[j].push_back(static_cast<int>(i));
    }
  }
  return lists;
}

// BFS from one source; fills `dist` (size N) with hop counts or kUnreachable.
inline void bfs(const Graph& graph, int source, std::vector<int>& dist, std::vector<int>& queue) {
  std::fill(dist.begin(), dist.end(), kUnreachable);
  queue.clear();
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int v : graph.neighbors[u]) {
      if (dist[v] != kUnreachable) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
}

inline double kernel_entry(const Matrix& points, const NonlocalKernel& kernel, Eigen::Index i,
                           Eigen::Index j) {
  return kernel.evaluate(points.row(i).transpose(), points.row(j).transpose());
}

}  // namespace latent_ot::kernels::detail
