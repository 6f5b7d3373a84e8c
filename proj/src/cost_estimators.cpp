#include "latent_ot/cost_estimators.hpp"

#include "latent_ot/error.hpp"
#include "latent_ot/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace latent_ot {

CostMap::CostMap(Kind kind, std::vector<std::pair<double, double>> breakpoints)
    : kind_(kind), breakpoints_(std::move(breakpoints)) {}

CostMap CostMap::identity(double diameter) {
  require(diameter > 0.0, ErrorKind::InvalidParameter, "cost map: diameter must be positive");
  return CostMap(Kind::Identity, {{0.0, 0.0}, {diameter, diameter}});
}

CostMap CostMap::one_minus(double w_min, double w_max) {
  require(0.0 <= w_min && w_min < w_max && w_max <= 1.0, ErrorKind::InvalidParameter,
          "cost map: need 0 <= w_min < w_max <= 1");
  return CostMap(Kind::OneMinus, {{w_min, 1.0 - w_min}, {w_max, 1.0 - w_max}});
}

CostMap CostMap::table(std::vector<std::pair<double, double>> breakpoints) {
  require(breakpoints.size() >= 2, ErrorKind::InvalidParameter,
          "cost map: a table needs at least two breakpoints");
  bool increasing = true, decreasing = true;
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    require(breakpoints[k].first > breakpoints[k - 1].first, ErrorKind::InvalidParameter,
            "cost map: breakpoints must have strictly increasing x");
    increasing &= breakpoints[k].second >= breakpoints[k - 1].second;
    decreasing &= breakpoints[k].second <= breakpoints[k - 1].second;
  }
  require(increasing || decreasing, ErrorKind::InvalidParameter, "cost map: table must be monotone");
  for (const auto& bp : breakpoints) {
    require(bp.second >= 0.0 && std::isfinite(bp.second), ErrorKind::InvalidParameter,
            "cost map: costs must be finite and nonnegative");
  }
  return CostMap(Kind::Table, std::move(breakpoints));
}

double CostMap::operator()(double t) const {
  const double x = std::clamp(t, domain_min(), domain_max());
  auto upper = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x,
                                [](double v, const auto& bp) { return v < bp.first; });
  if (upper == breakpoints_.end()) return breakpoints_.back().second;
  if (upper == breakpoints_.begin()) return breakpoints_.front().second;
  const auto& [x1, y1] = *upper;
  const auto& [x0, y0] = *(upper - 1);
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

double CostMap::range_min() const {
  return std::min(breakpoints_.front().second, breakpoints_.back().second);
}

double CostMap::range_max() const {
  return std::max(breakpoints_.front().second, breakpoints_.back().second);
}

double CostMap::lipschitz_constant() const {
  double c = 0.0;
  for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
    const double slope = (breakpoints_[k].second - breakpoints_[k - 1].second) /
                         (breakpoints_[k].first - breakpoints_[k - 1].first);
    c = std::max(c, std::abs(slope));
  }
  return c;
}

void UsvtParams::validate() const {
  require(gamma > 0.0, ErrorKind::InvalidParameter, "usvt: gamma must be positive");
  require(rho > 0.0 && rho <= 1.0, ErrorKind::InvalidParameter, "usvt: rho must lie in (0, 1]");
  require(0.0 <= w_min && w_min <= w_max && w_max <= 1.0, ErrorKind::InvalidParameter,
          "usvt: need 0 <= w_min <= w_max <= 1");
}

HopMatrix hop_counts(const Graph& graph, std::span<const int> sources,
                     std::span<const int> targets) {
  std::unordered_set<int> seen;
  for (int s : sources) {
    require(s >= 0 && s < graph.node_count, ErrorKind::InvalidParameter,
            "hop_counts: source index out of range");
    seen.insert(s);
  }
  for (int t : targets) {
    require(t >= 0 && t < graph.node_count, ErrorKind::InvalidParameter,
            "hop_counts: target index out of range");
    require(!seen.contains(t), ErrorKind::InvalidParameter,
            "hop_counts: sources and targets must be disjoint");
  }
  return {kernels::omp::multi_source_bfs(graph, sources, targets)};
}

Matrix geodesic_estimate(const HopMatrix& hops, double h) {
  require(h > 0.0, ErrorKind::InvalidParameter, "geodesic_estimate: h must be positive");
  Matrix d(hops.entries.rows(), hops.entries.cols());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      const int count = hops.entries(i, j);
      if (count == HopMatrix::kUnreachable) {
        fail(ErrorKind::TargetsDisconnected, "geodesic_estimate: source " + std::to_string(i) +
                                                 " cannot reach target " + std::to_string(j));
      }
      d(i, j) = h * count;
    }
  }
  return d;
}

CostMatrix cost_from_distances(const Matrix& distances, const CostMap& f) {
  Matrix c = distances.unaryExpr([&f](double t) { return f(t); });
  return CostMatrix(std::move(c), f.range_min(), f.range_max());
}

Eigendecomposition symmetric_eigen(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorKind::InvalidParameter, "eigen: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  require(solver.info() == Eigen::Success, ErrorKind::NumericFailure,
          "eigen: symmetric eigensolver did not converge");
  // Eigen returns ascending order.
  Eigendecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Matrix usvt(const Matrix& adjacency, const UsvtParams& params) {
  params.validate();
  const Eigen::Index n = adjacency.rows();
  require(n >= 2 && adjacency.cols() == n, ErrorKind::InvalidParameter,
          "usvt: adjacency must be square with N >= 2");
  const Eigendecomposition eig = symmetric_eigen(adjacency);
  const double threshold = params.gamma * std::sqrt(params.rho * static_cast<double>(n));

  Eigen::Index kept = 0;
  while (kept < n && eig.eigenvalues[kept] >= threshold) ++kept;

  Matrix estimate = Matrix::Zero(n, n);
  if (kept > 0) {
    const auto vectors = eig.eigenvectors.leftCols(kept);
    estimate = vectors * eig.eigenvalues.head(kept).asDiagonal() * vectors.transpose();
    estimate /= params.rho;
  }
  return estimate.cwiseMax(params.w_min).cwiseMin(params.w_max);
}

CostMatrix usvt_cost_block(const Matrix& w_hat, Eigen::Index n, Eigen::Index m,
                           const CostMap& f) {
  require(n >= 1 && m >= 1 && w_hat.rows() == n + m && w_hat.cols() == n + m,
          ErrorKind::InvalidParameter, "usvt_cost_block: estimate must be (n+m) x (n+m)");
  return cost_from_distances(w_hat.block(0, n, n, m), f);
}

Matrix fast_kernel_block(const Graph& graph, double rho, Eigen::Index n, Eigen::Index m) {
  require(rho > 0.0 && rho <= 1.0, ErrorKind::InvalidParameter,
          "fast_kernel_block: rho must lie in (0, 1]");
  require(n >= 1 && m >= 1 && n + m <= graph.node_count, ErrorKind::InvalidParameter,
          "fast_kernel_block: block exceeds the graph");
  Matrix k = Matrix::Zero(n, m);
  const double level = 1.0 / rho;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j : graph.neighbors[i]) {
      if (j >= n && j < n + m) k(i, j - n) = level;
    }
  }
  return k;
}

}  // namespace latent_ot
