#include "latent_ot/latent_models.hpp"

#include "latent_ot/error.hpp"
#include "latent_ot/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace latent_ot {

namespace {

constexpr long kMaxAttemptsPerPoint = 1000000;

// Range of <direction, z> over the manifold.
std::pair<double, double> linear_range(const ManifoldSpec& manifold, const Point& direction) {
  switch (manifold.kind) {
    case ManifoldSpec::Kind::Sphere:
    case ManifoldSpec::Kind::Circle: {
      const double reach = manifold.radius * direction.norm();
      return {-reach, reach};
    }
    case ManifoldSpec::Kind::UnitSquare: {
      double lo = 0.0, hi = 0.0;
      for (double cx : {0.0, 1.0}) {
        for (double cy : {0.0, 1.0}) {
          const double v = direction[0] * cx + direction[1] * cy;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      return {lo, hi};
    }
  }
  return {0.0, 0.0};
}

// Uniform draw from the manifold's uniform measure.
Point uniform_point(const ManifoldSpec& manifold, Xoshiro256& rng) {
  switch (manifold.kind) {
    case ManifoldSpec::Kind::Sphere: {
      std::normal_distribution<double> normal;
      Point p(3);
      double norm = 0.0;
      while (norm == 0.0) {
        for (int k = 0; k < 3; ++k) p[k] = normal(rng);
        norm = p.norm();
      }
      return p * (manifold.radius / norm);
    }
    case ManifoldSpec::Kind::UnitSquare: {
      Point p(2);
      p[0] = rng.uniform();
      p[1] = rng.uniform();
      return p;
    }
    case ManifoldSpec::Kind::Circle: {
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      Point p(2);
      p << manifold.radius * std::cos(angle), manifold.radius * std::sin(angle);
      return p;
    }
  }
  return {};
}

void validate_density(const ManifoldSpec& manifold, const DensitySpec& density) {
  if (density.kind == DensitySpec::Kind::Uniform) return;
  require(density.direction.size() == manifold.ambient_dim(), ErrorKind::DensityMisconfigured,
          "density: tilt direction must match the ambient dimension");
  require(density.lower_bound(manifold) > 0.0, ErrorKind::DensityMisconfigured,
          "density: tilted density is not bounded away from zero");
}

}  // namespace

int ManifoldSpec::intrinsic_dim() const { return kind == Kind::Circle ? 1 : 2; }

int ManifoldSpec::ambient_dim() const { return kind == Kind::Sphere ? 3 : 2; }

double ManifoldSpec::diameter() const {
  return kind == Kind::UnitSquare ? std::numbers::sqrt2 : std::numbers::pi * radius;
}

double ManifoldSpec::euclidean_diameter() const {
  return kind == Kind::UnitSquare ? std::numbers::sqrt2 : 2.0 * radius;
}

double DensitySpec::evaluate(const Point& z) const {
  if (kind == Kind::Uniform) return 1.0;
  return 1.0 + strength * direction.dot(z);
}

double DensitySpec::lower_bound(const ManifoldSpec& manifold) const {
  if (kind == Kind::Uniform) return 1.0;
  const auto [lo, hi] = linear_range(manifold, direction);
  return 1.0 + std::min(strength * lo, strength * hi);
}

double DensitySpec::upper_bound(const ManifoldSpec& manifold) const {
  if (kind == Kind::Uniform) return 1.0;
  const auto [lo, hi] = linear_range(manifold, direction);
  return 1.0 + std::max(strength * lo, strength * hi);
}

char LatentConfiguration::role(Eigen::Index i) const {
  if (i < n) return 'x';
  if (i < n + m) return 'y';
  return 'z';
}

Graph Graph::empty(int nodes) {
  Graph g;
  g.node_count = nodes;
  g.neighbors.assign(nodes, {});
  return g;
}

Graph Graph::from_edges(int nodes, const std::vector<std::pair<int, int>>& edges) {
  Graph g = empty(nodes);
  for (const auto& [i, j] : edges) {
    require(i >= 0 && j >= 0 && i < nodes && j < nodes && i != j, ErrorKind::InvalidInput,
            "graph: invalid edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    g.neighbors[i].push_back(j);
    g.neighbors[j].push_back(i);
  }
  for (auto& list : g.neighbors) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return g;
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : neighbors) total += list.size();
  return total / 2;
}

bool Graph::has_edge(int i, int j) const {
  const auto& list = neighbors.at(i);
  return std::binary_search(list.begin(), list.end(), j);
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count());
  for (int i = 0; i < node_count; ++i) {
    for (int j : neighbors[i]) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

Matrix Graph::adjacency_matrix() const {
  Matrix a = Matrix::Zero(node_count, node_count);
  for (int i = 0; i < node_count; ++i) {
    for (int j : neighbors[i]) a(i, j) = 1.0;
  }
  return a;
}

double NonlocalKernel::evaluate(const Point& a, const Point& b) const {
  if (form == Form::Constant) return value;
  return std::exp(-std::pow((a - b).norm(), p) / sigma);
}

double NonlocalKernel::w_min() const { return form == Form::Constant ? value : 0.0; }

double NonlocalKernel::w_max() const { return form == Form::Constant ? value : 1.0; }

void NonlocalKernel::validate() const {
  require(rho >= 0.0 && rho <= 1.0, ErrorKind::InvalidParameter, "kernel: rho must lie in [0, 1]");
  if (form == Form::GaussianPower) {
    require(p >= 1.0 && sigma > 0.0, ErrorKind::InvalidParameter,
            "kernel: gaussian form needs p >= 1 and sigma > 0");
  } else {
    require(value >= 0.0, ErrorKind::InvalidParameter, "kernel: constant must be nonnegative");
  }
  require(rho * w_max() <= 1.0, ErrorKind::InvalidParameter,
          "kernel: edge probability rho * w exceeds 1");
}

double dense_rho(double value) {
  require(value > 0.0 && value <= 1.0, ErrorKind::InvalidParameter, "rho must lie in (0, 1]");
  return value;
}

double sparse_rho(int node_count, double c) {
  require(node_count >= 2 && c > 0.0, ErrorKind::InvalidParameter,
          "sparse_rho: need N >= 2 and c > 0");
  const double n = static_cast<double>(node_count);
  return std::min(1.0, c * std::log(n) / n);
}

LatentConfiguration sample_latents(const ManifoldSpec& manifold, const DensitySpec& density,
                                   Eigen::Index n, Eigen::Index m, Eigen::Index node_count,
                                   RngSeed seed, const TargetPlacement& placement) {
  require(n >= 0 && m >= 0 && n + m <= node_count, ErrorKind::InvalidParameter,
          "sample_latents: need n + m <= N");
  require(manifold.radius > 0.0, ErrorKind::InvalidParameter, "sample_latents: radius must be positive");
  validate_density(manifold, density);
  const bool regions = placement.kind == TargetPlacement::Kind::TwoRegion;
  if (regions) {
    require(placement.center_x.size() == manifold.ambient_dim() &&
                placement.center_y.size() == manifold.ambient_dim() && placement.radius > 0.0,
            ErrorKind::InvalidParameter, "sample_latents: invalid two-region placement");
  }

  const double envelope = density.upper_bound(manifold);
  auto rng = Xoshiro256::for_stream(seed, 0);

  LatentConfiguration latents;
  latents.manifold = manifold;
  latents.n = n;
  latents.m = m;
  latents.points.resize(node_count, manifold.ambient_dim());
  for (Eigen::Index i = 0; i < node_count; ++i) {
    const Point* center = nullptr;
    if (regions && i < n) center = &placement.center_x;
    if (regions && i >= n && i < n + m) center = &placement.center_y;

    bool accepted = false;
    for (long attempt = 0; attempt < kMaxAttemptsPerPoint && !accepted; ++attempt) {
      Point z = uniform_point(manifold, rng);
      if (rng.uniform() * envelope > density.evaluate(z)) continue;
      if (center && true_geodesic(manifold, z, *center) > placement.radius) continue;
      latents.points.row(i) = z.transpose();
      accepted = true;
    }
    require(accepted, ErrorKind::DensityMisconfigured,
            "sample_latents: rejection sampling exceeded 1e6 attempts for point " +
                std::to_string(i));
  }
  return latents;
}

Graph eps_graph(const LatentConfiguration& latents, double h) {
  require(h > 0.0, ErrorKind::InvalidParameter, "eps_graph: h must be positive");
  Graph g;
  g.node_count = static_cast<int>(latents.node_count());
  g.neighbors = kernels::omp::radius_neighbors(latents.points, h);
  return g;
}

Graph sample_kernel_graph(const LatentConfiguration& latents, const NonlocalKernel& kernel,
                          RngSeed seed) {
  kernel.validate();
  Graph g;
  g.node_count = static_cast<int>(latents.node_count());
  g.neighbors = kernels::omp::bernoulli_edges(latents.points, kernel, seed);
  return g;
}

Matrix true_kernel_matrix(const LatentConfiguration& latents, const NonlocalKernel& kernel) {
  kernel.validate();
  return kernels::omp::kernel_matrix(latents.points, kernel);
}

double true_geodesic(const ManifoldSpec& manifold, const Point& x, const Point& y) {
  switch (manifold.kind) {
    case ManifoldSpec::Kind::Sphere:
    case ManifoldSpec::Kind::Circle: {
      const double r2 = manifold.radius * manifold.radius;
      const double cosine = std::clamp(x.dot(y) / r2, -1.0, 1.0);
      return manifold.radius * std::acos(cosine);
    }
    case ManifoldSpec::Kind::UnitSquare:
      return (x - y).norm();
  }
  return 0.0;
}

double h_schedule(int node_count, int intrinsic_dim, double c0) {
  require(node_count >= 2 && intrinsic_dim >= 1 && c0 > 0.0, ErrorKind::InvalidParameter,
          "h_schedule: need N >= 2, k >= 1, c0 > 0");
  const double n = static_cast<double>(node_count);
  const double log_n = std::log(n);
  return std::pow(c0 * log_n * log_n / n, 1.0 / intrinsic_dim);
}

}  // namespace latent_ot
