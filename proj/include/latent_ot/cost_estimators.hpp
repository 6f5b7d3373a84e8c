#pragma once

#include "latent_ot/latent_models.hpp"
#include "latent_ot/ot_core.hpp"

#include <span>
#include <utility>
#include <vector>

namespace latent_ot {

/// Monotone piecewise-linear map from distances (or kernel values) to costs.
/// Inputs outside the domain are clamped to it before evaluation.
class CostMap {
 public:
  enum class Kind { Identity, OneMinus, Table };

  /// f(t) = t on [0, diameter].
  static CostMap identity(double diameter);
  /// f(w) = 1 - w on [w_min, w_max].
  static CostMap one_minus(double w_min = 0.0, double w_max = 1.0);
  /// Linear interpolation through breakpoints with strictly increasing x and
  /// monotone y. Throws InvalidParameter otherwise.
  static CostMap table(std::vector<std::pair<double, double>> breakpoints);

  double operator()(double t) const;

  Kind kind() const { return kind_; }
  double domain_min() const { return breakpoints_.front().first; }
  double domain_max() const { return breakpoints_.back().first; }
  double range_min() const;
  double range_max() const;
  /// Largest breakpoint slope, c_f.
  double lipschitz_constant() const;
  const std::vector<std::pair<double, double>>& breakpoints() const { return breakpoints_; }

 private:
  CostMap(Kind kind, std::vector<std::pair<double, double>> breakpoints);

  Kind kind_;
  std::vector<std::pair<double, double>> breakpoints_;
};

/// Source-to-target hop counts; kUnreachable marks disconnected pairs.
struct HopMatrix {
  static constexpr int kUnreachable = -1;
  Eigen::MatrixXi entries;
};

/// Symmetric eigendecomposition with eigenvalues in descending order.
struct Eigendecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;  // column k pairs with eigenvalues[k]
};

struct UsvtParams {
  double gamma = 1.0;
  double rho = 1.0;
  double w_min = 0.0;
  double w_max = 1.0;

  void validate() const;
};

HopMatrix hop_counts(const Graph& graph, std::span<const int> sources,
                     std::span<const int> targets);

/// d_ij = h * SP(i, j). Throws TargetsDisconnected naming the first
/// unreachable pair.
Matrix geodesic_estimate(const HopMatrix& hops, double h);

CostMatrix cost_from_distances(const Matrix& distances, const CostMap& f);

/// Throws NumericFailure if the eigensolver does not converge.
Eigendecomposition symmetric_eigen(const Matrix& a);

/// Universal singular value thresholding: keep eigenpairs with
/// sigma >= gamma sqrt(rho N), rescale by 1/rho, clamp to [w_min, w_max].
Matrix usvt(const Matrix& adjacency, const UsvtParams& params);

/// f applied to rows [0, n) x columns [n, n + m) of the estimate.
CostMatrix usvt_cost_block(const Matrix& w_hat, Eigen::Index n, Eigen::Index m,
                           const CostMap& f);

/// Rescaled cross-group adjacency block A[0:n, n:n+m] / rho.
Matrix fast_kernel_block(const Graph& graph, double rho, Eigen::Index n, Eigen::Index m);

}  // namespace latent_ot
