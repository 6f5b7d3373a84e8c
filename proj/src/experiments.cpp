#include "latent_ot/harness.hpp"

#include "latent_ot/error.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <random>

namespace latent_ot {

namespace {

struct Trial {
  const ExperimentConfig& cfg;
  int N;
  std::uint64_t seed;
  int n;
  int m;
  double eps;
  std::vector<ResultRow> rows;

  void add(const std::string& estimator, const std::string& metric, double value) {
    rows.push_back({to_string(cfg.experiment), seed, N, n, m, eps, estimator, metric, value});
  }
  void add_finite(const std::string& estimator, const std::string& metric, double value) {
    if (std::isfinite(value)) add(estimator, metric, value);
  }
};

std::vector<int> index_range(int begin, int end) {
  std::vector<int> out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

double relative_error(double estimate, double truth) {
  if (truth == 0.0) return estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(1.0 - estimate / truth);
}

void add_ot_rows(Trial& t, const std::string& estimator, const CostMatrix& cost,
                 const CostMatrix& estimate) {
  const auto alpha = DiscreteDistribution::uniform(t.n);
  const auto beta = DiscreteDistribution::uniform(t.m);
  const StabilityReport report = stability_report(cost, estimate, alpha, beta, t.eps);
  const DiscrepancyReport disc = discrepancy(cost.entries, estimate.entries);

  t.add(estimator, "cost_sup", disc.sup_norm);
  t.add(estimator, "cost_frobenius", disc.frobenius_normalized);
  t.add(estimator, "cost_operator", disc.operator_norm);
  t.add(estimator, "ot_value_true", report.value_true);
  t.add(estimator, "ot_value_estimate", report.value_estimate);
  t.add(estimator, "ot_abs_error", std::abs(report.value_true - report.value_estimate));
  t.add(estimator, "ot_error", relative_error(report.value_estimate, report.value_true));
  t.add(estimator, "plan_kl", report.plan_kl);
  t.add_finite(estimator, "bound_sup_norm", report.sup_norm.rhs);
  t.add_finite(estimator, "bound_spectral", report.spectral.rhs);
  t.add_finite(estimator, "bound_plan", report.plan.rhs);
  t.add_finite(estimator, "bound_kernel", report.kernel_frobenius.rhs);
  t.add(estimator, "bounds_hold", report.all_hold() ? 1.0 : 0.0);
}

void local_trial(Trial& t) {
  const auto& cfg = t.cfg;
  const RngSeed seed = trial_seed(t.seed, t.N);
  const auto latents =
      sample_latents(cfg.manifold, cfg.density, t.n, t.m, t.N, seed, cfg.placement);
  const double h = cfg.h ? *cfg.h : h_schedule(t.N, cfg.manifold.intrinsic_dim(), cfg.h_c0);
  const Graph graph = eps_graph(latents, h);
  const std::string est = "geodesic_hops";
  t.add(est, "h", h);
  t.add(est, "edge_count", static_cast<double>(graph.edge_count()));

  const HopMatrix hops = hop_counts(graph, index_range(0, t.n), index_range(t.n, t.n + t.m));
  Matrix d_hat;
  try {
    d_hat = geodesic_estimate(hops, h);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TargetsDisconnected) throw;
    t.add(est, "failed_disconnected", 1.0);
    return;
  }
  Matrix d(t.n, t.m);
  for (int i = 0; i < t.n; ++i) {
    for (int j = 0; j < t.m; ++j) d(i, j) = true_geodesic(cfg.manifold, latents.x(i), latents.y(j));
  }
  const CostMap f = cfg.resolved_cost_map();
  const double distance_error = sup_norm(d_hat - d);
  t.add(est, "distance_sup", distance_error);
  t.add(est, "lipschitz_rhs", f.lipschitz_constant() * distance_error);
  add_ot_rows(t, est, cost_from_distances(d, f), cost_from_distances(d_hat, f));
}

struct NonlocalSample {
  LatentConfiguration latents;
  NonlocalKernel kernel;
  Graph graph;
};

NonlocalSample sample_nonlocal(const Trial& t) {
  const auto& cfg = t.cfg;
  const RngSeed seed = trial_seed(t.seed, t.N);
  NonlocalSample s;
  s.latents = sample_latents(cfg.manifold, cfg.density, t.n, t.m, t.N, seed, cfg.placement);
  s.kernel = cfg.kernel;
  s.kernel.rho = cfg.rho.at(t.N);
  s.graph = sample_kernel_graph(s.latents, s.kernel, seed);
  return s;
}

void usvt_rows(Trial& t, const NonlocalSample& s, const Matrix& w, const std::string& est,
               double gamma) {
  const UsvtParams params{gamma, s.kernel.rho, s.kernel.w_min(), s.kernel.w_max()};
  const Matrix w_hat = usvt(s.graph.adjacency_matrix(), params);
  const DiscrepancyReport disc = discrepancy(w, w_hat, static_cast<double>(t.N), "N");
  t.add(est, "kernel_frobenius_per_node", disc.frobenius_normalized);
  t.add(est, "kernel_sup", disc.sup_norm);
  t.add(est, "kernel_operator_per_node", disc.operator_norm / t.N);

  const CostMap f = t.cfg.resolved_cost_map();
  add_ot_rows(t, est, cost_from_distances(w.block(0, t.n, t.n, t.m), f),
              usvt_cost_block(w_hat, t.n, t.m, f));
}

void usvt_trial(Trial& t) {
  const NonlocalSample s = sample_nonlocal(t);
  const Matrix w = true_kernel_matrix(s.latents, s.kernel);
  t.add("usvt", "edge_count", static_cast<double>(s.graph.edge_count()));
  t.add("usvt", "rho", s.kernel.rho);
  usvt_rows(t, s, w, "usvt", t.cfg.gamma);
}

std::string gamma_label(double gamma) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "usvt_gamma_%g", gamma);
  return buf;
}

void gamma_trial(Trial& t) {
  const NonlocalSample s = sample_nonlocal(t);
  const Matrix w = true_kernel_matrix(s.latents, s.kernel);
  for (double gamma : t.cfg.gammas) usvt_rows(t, s, w, gamma_label(gamma), gamma);
}

void fast_trial(Trial& t) {
  const NonlocalSample s = sample_nonlocal(t);
  const double p = s.kernel.p;
  const double sigma = s.kernel.sigma;
  Matrix c(t.n, t.m);
  for (int i = 0; i < t.n; ++i) {
    for (int j = 0; j < t.m; ++j) {
      c(i, j) = std::pow((s.latents.x(i) - s.latents.y(j)).norm(), p);
    }
  }
  const double c_max = std::pow(t.cfg.manifold.euclidean_diameter(), p);
  const CostMatrix cost(c, 0.0, c_max);
  const double eta = t.cfg.eta ? *t.cfg.eta : std::exp(c_max / sigma);

  const auto alpha = DiscreteDistribution::uniform(t.n);
  const auto beta = DiscreteDistribution::uniform(t.m);
  SolverConfig solver;
  solver.epsilon = sigma;
  const OtResult truth = sinkhorn(cost, alpha, beta, solver);

  const Matrix k_hat = fast_kernel_block(s.graph, s.kernel.rho, t.n, t.m);
  const Matrix k = (-c / sigma).array().exp().matrix();
  solver.eta = eta;
  const BoxedDualResult boxed =
      dual_ascent_boxed(GibbsKernel::estimate(k_hat, sigma), alpha, beta, solver);

  const std::string est = "fast";
  const DiscrepancyReport disc = discrepancy(k, k_hat);
  t.add(est, "edge_count", static_cast<double>(s.graph.edge_count()));
  t.add(est, "eta", eta);
  t.add(est, "kernel_block_frobenius", disc.frobenius_normalized);
  t.add(est, "kernel_block_sup", disc.sup_norm);
  t.add(est, "ot_value_true", truth.value);
  t.add(est, "ot_value_estimate", boxed.value);
  t.add(est, "ot_abs_error", std::abs(truth.value - boxed.value));
  t.add(est, "ot_error", relative_error(boxed.value, truth.value));
  t.add(est, "true_converged", truth.converged ? 1.0 : 0.0);
  t.add(est, "boxed_converged", boxed.converged ? 1.0 : 0.0);
}

Vector random_simplex(Xoshiro256& rng, int size) {
  std::exponential_distribution<double> exponential;
  Vector w(size);
  for (int k = 0; k < size; ++k) w[k] = exponential(rng) + 1e-3;
  return w / w.sum();
}

Matrix random_costs(Xoshiro256& rng, int rows, int cols) {
  Matrix c(rows, cols);
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = 0.1 + 0.9 * rng.uniform();
  return c;
}

void stability_trial(Trial& t) {
  auto rng = Xoshiro256::for_stream(trial_seed(t.seed, t.N), 0);
  const CostMatrix cost(random_costs(rng, t.n, t.m));
  const CostMatrix estimate(random_costs(rng, t.n, t.m));
  const bool uniform = t.eps == 0.0;
  const DiscreteDistribution alpha(uniform ? Vector::Constant(t.n, 1.0 / t.n) : random_simplex(rng, t.n));
  const DiscreteDistribution beta(uniform ? Vector::Constant(t.m, 1.0 / t.m) : random_simplex(rng, t.m));
  const StabilityReport report = stability_report(cost, estimate, alpha, beta, t.eps);

  const std::string est = "random_instance";
  t.add(est, "value_gap", report.sup_norm.lhs);
  if (!uniform) t.add(est, "plan_kl", report.plan_kl);
  for (const BoundCheck* check :
       {&report.sup_norm, &report.spectral, &report.plan, &report.kernel_frobenius}) {
    if (!check->applicable) continue;
    t.add_finite(est, "bound_" + check->name, check->rhs);
    t.add_finite(est, "slack_" + check->name, check->slack());
  }
  t.add(est, "bounds_hold", report.all_hold() ? 1.0 : 0.0);
}

void run_trial(Trial& t) {
  switch (t.cfg.experiment) {
    case ExperimentKind::LocalGeodesic: return local_trial(t);
    case ExperimentKind::UsvtNonlocal: return usvt_trial(t);
    case ExperimentKind::FastNonlocal: return fast_trial(t);
    case ExperimentKind::GammaSweep: return gamma_trial(t);
    case ExperimentKind::StabilitySuite: return stability_trial(t);
  }
}

}  // namespace

RngSeed trial_seed(std::uint64_t seed, int node_count) {
  std::uint64_t state = seed;
  state = splitmix64(state) ^ static_cast<std::uint64_t>(node_count);
  return RngSeed{splitmix64(state)};
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Cell {
    int N;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int size : cfg.grid) {
    for (std::uint64_t seed : cfg.seeds) cells.push_back({size, seed});
  }

  const long count = static_cast<long>(cells.size());
  std::vector<std::vector<ResultRow>> rows(cells.size());
  std::vector<double> seconds(cells.size(), 0.0);
  std::vector<std::exception_ptr> errors(cells.size());
  const int workers = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
  const double eps = cfg.resolved_epsilon();

#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long c = 0; c < count; ++c) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const Cell cell = cells[c];
      Trial trial{cfg, cell.N, cell.seed, cfg.targets_n(cell.N), cfg.targets_m(cell.N), eps, {}};
      run_trial(trial);
      rows[c] = std::move(trial.rows);
    } catch (...) {
      errors[c] = std::current_exception();
    }
    seconds[c] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  ExperimentOutput out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out.table.append(rows[c]);
    out.timings.push_back({to_string(cfg.experiment), cells[c].N, cells[c].seed, seconds[c]});
  }
  out.table.sort();
  return out;
}

}  // namespace latent_ot
