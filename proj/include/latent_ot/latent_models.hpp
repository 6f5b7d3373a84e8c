#pragma once

#include "latent_ot/ot_core.hpp"
#include "latent_ot/rng.hpp"

#include <cstdint>
#include <vector>

namespace latent_ot {

using Point = Eigen::VectorXd;

/// Latent manifold. Points are stored in ambient coordinates.
struct ManifoldSpec {
  enum class Kind { Sphere, UnitSquare, Circle };

  Kind kind = Kind::Sphere;
  double radius = 1.0;

  static ManifoldSpec sphere(double radius = 1.0) { return {Kind::Sphere, radius}; }
  static ManifoldSpec unit_square() { return {Kind::UnitSquare, 1.0}; }
  static ManifoldSpec circle(double radius = 1.0) { return {Kind::Circle, radius}; }

  int intrinsic_dim() const;
  int ambient_dim() const;
  /// Geodesic diameter D_X.
  double diameter() const;
  /// Largest Euclidean distance between two points of the manifold.
  double euclidean_diameter() const;
};

/// Sampling density of the auxiliary nodes with respect to the uniform
/// measure: uniform, or the linear tilt 1 + strength * <direction, z>.
struct DensitySpec {
  enum class Kind { Uniform, Tilted };

  Kind kind = Kind::Uniform;
  Point direction;
  double strength = 0.0;

  static DensitySpec uniform() { return {}; }
  static DensitySpec tilted(Point direction, double strength) {
    return {Kind::Tilted, std::move(direction), strength};
  }

  /// Unnormalized density at z.
  double evaluate(const Point& z) const;
  /// c_z; must be positive for a valid density.
  double lower_bound(const ManifoldSpec& manifold) const;
  /// Envelope used by rejection sampling.
  double upper_bound(const ManifoldSpec& manifold) const;
};

/// Where the target nodes x_i, y_j are drawn. Two-region mode keeps the
/// density but conditions each group on a geodesic ball around its center.
struct TargetPlacement {
  enum class Kind { Iid, TwoRegion };

  Kind kind = Kind::Iid;
  Point center_x;
  Point center_y;
  double radius = 0.0;
};

/// Rows of `points` are x_1..x_n, y_1..y_m, then the auxiliary z's, so row
/// indices coincide with graph node indices.
struct LatentConfiguration {
  Matrix points;  // N x ambient_dim
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  ManifoldSpec manifold;

  Eigen::Index node_count() const { return points.rows(); }
  Point point(Eigen::Index i) const { return points.row(i).transpose(); }
  Point x(Eigen::Index i) const { return point(i); }
  Point y(Eigen::Index j) const { return point(n + j); }
  /// 'x', 'y' or 'z'.
  char role(Eigen::Index i) const;
};

/// Symmetric, loop-free, unweighted graph as sorted neighbor lists.
struct Graph {
  int node_count = 0;
  std::vector<std::vector<int>> neighbors;

  static Graph empty(int nodes);
  /// Builds a graph from i < j pairs; duplicates are ignored.
  static Graph from_edges(int nodes, const std::vector<std::pair<int, int>>& edges);

  std::size_t edge_count() const;
  bool has_edge(int i, int j) const;
  /// All edges as (i, j), i < j, lexicographically ascending.
  std::vector<std::pair<int, int>> edges() const;
  /// Dense 0/1 adjacency.
  Matrix adjacency_matrix() const;
};

/// Sparsified fixed kernel w_N = rho * w.
struct NonlocalKernel {
  enum class Form { GaussianPower, Constant };

  Form form = Form::GaussianPower;
  double rho = 1.0;
  double p = 2.0;       // exponent on the distance
  double sigma = 1.0;   // w = exp(-||x - y||^p / sigma)
  double value = 1.0;   // constant kernel level

  static NonlocalKernel gaussian(double p, double sigma, double rho) {
    return {Form::GaussianPower, rho, p, sigma, 1.0};
  }
  static NonlocalKernel constant(double value, double rho) {
    return {Form::Constant, rho, 2.0, 1.0, value};
  }

  double evaluate(const Point& a, const Point& b) const;
  double w_min() const;
  double w_max() const;
  void validate() const;
};

/// Sparsity presets: constant (dense) and c log N / N (relatively sparse).
double dense_rho(double value);
double sparse_rho(int node_count, double c);

LatentConfiguration sample_latents(const ManifoldSpec& manifold, const DensitySpec& density,
                                   Eigen::Index n, Eigen::Index m, Eigen::Index node_count,
                                   RngSeed seed, const TargetPlacement& placement = {});

/// Closed-ball connectivity: edge iff ||z_i - z_j|| <= h.
Graph eps_graph(const LatentConfiguration& latents, double h);

/// Independent Bernoulli(rho w(z_i, z_j)) edges for every pair i < j.
Graph sample_kernel_graph(const LatentConfiguration& latents, const NonlocalKernel& kernel,
                          RngSeed seed);

/// W_ij = w(z_i, z_j) including the diagonal.
Matrix true_kernel_matrix(const LatentConfiguration& latents, const NonlocalKernel& kernel);

double true_geodesic(const ManifoldSpec& manifold, const Point& x, const Point& y);

/// h_N = (c0 (log N)^2 / N)^(1/k).
double h_schedule(int node_count, int intrinsic_dim, double c0);

}  // namespace latent_ot
