#include "latent_ot/properties.hpp"

#include "latent_ot/cost_estimators.hpp"
#include "latent_ot/diagnostics.hpp"
#include "latent_ot/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>

namespace latent_ot {

namespace {

constexpr double kEpsilons[] = {0.1, 0.5, 1.0};

struct Instance {
  CostMatrix cost;
  DiscreteDistribution alpha;
  DiscreteDistribution beta;
  double eps;
};

int draw_size(Xoshiro256& rng, int max_size) {
  return 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_size));
}

Matrix random_costs(Xoshiro256& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix c(rows, cols);
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = 0.1 + 0.9 * rng.uniform();
  return c;
}

Vector random_simplex(Xoshiro256& rng, Eigen::Index size) {
  std::exponential_distribution<double> exponential;
  Vector w(size);
  for (Eigen::Index k = 0; k < size; ++k) w[k] = exponential(rng) + 1e-3;
  return w / w.sum();
}

Instance random_instance(Xoshiro256& rng) {
  const int n = draw_size(rng, 6), m = draw_size(rng, 6);
  const double eps = kEpsilons[rng() % 3];
  return {CostMatrix(random_costs(rng, n, m)), DiscreteDistribution(random_simplex(rng, n)),
          DiscreteDistribution(random_simplex(rng, m)), eps};
}

SolverConfig solver_for(double eps) {
  SolverConfig cfg;
  cfg.epsilon = eps;
  return cfg;
}

std::vector<int> index_range(int begin, int end) {
  std::vector<int> out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

class Runner {
 public:
  explicit Runner(const PropertyOptions& options) : options_(options) {}

  // `check` returns the slack of one randomized instance, or NaN to skip it.
  void run(const std::string& module, const std::string& name, int trials,
           const std::function<double(Xoshiro256&)>& check) {
    auto rng = Xoshiro256::for_stream(RngSeed{options_.seed}, report_.outcomes.size());
    PropertyOutcome outcome{module, name, 0, 0, INFINITY};
    for (int t = 0; t < trials; ++t) {
      const double slack = check(rng);
      if (std::isnan(slack)) continue;
      ++outcome.checks;
      outcome.worst_slack = std::min(outcome.worst_slack, slack);
      if (!(slack >= 0.0)) ++outcome.failures;
    }
    report_.outcomes.push_back(outcome);
  }

  double scale() const { return options_.bound_scale; }
  PropertyReport take() { return std::move(report_); }

 private:
  PropertyOptions options_;
  PropertyReport report_;
};

double bound_slack(const BoundCheck& check, double scale) {
  if (!check.applicable || std::isinf(check.rhs)) return NAN;
  return scale * check.rhs + 1e-9 - check.lhs;
}

void ot_core_properties(Runner& r, int trials) {
  const double scale = r.scale();
  r.run("ot_core", "marginal_feasibility", trials, [](Xoshiro256& rng) {
    const Instance in = random_instance(rng);
    const OtResult res = sinkhorn(in.cost, in.alpha, in.beta, solver_for(in.eps));
    const Matrix& p = res.plan.entries;
    const double rows = (p.rowwise().sum() - in.alpha.weights).lpNorm<1>();
    const double cols = (p.colwise().sum().transpose() - in.beta.weights).lpNorm<1>();
    return 1e-9 - std::max(rows, cols);
  });
  r.run("ot_core", "plan_factorization", trials, [](Xoshiro256& rng) {
    const Instance in = random_instance(rng);
    const OtResult res = sinkhorn(in.cost, in.alpha, in.beta, solver_for(in.eps));
    const Matrix k = gibbs_kernel(in.cost, in.eps).entries;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      for (Eigen::Index j = 0; j < k.cols(); ++j) {
        const double expected = in.alpha.weights[i] * std::exp(res.potentials.f[i] / in.eps) *
                                k(i, j) * std::exp(res.potentials.g[j] / in.eps) * in.beta.weights[j];
        worst = std::max(worst, std::abs(res.plan.entries(i, j) - expected) / expected);
      }
    }
    return 1e-9 - worst;
  });
  r.run("ot_core", "strong_duality", trials, [](Xoshiro256& rng) {
    const Instance in = random_instance(rng);
    const OtResult res = sinkhorn(in.cost, in.alpha, in.beta, solver_for(in.eps));
    const double dual = dual_value(gibbs_kernel(in.cost, in.eps), in.alpha, in.beta, res.potentials);
    return 1e-6 - std::abs(res.value - dual) / std::max(std::abs(res.value), 1e-300);
  });
  r.run("ot_core", "symmetry", trials, [](Xoshiro256& rng) {
    const Instance in = random_instance(rng);
    const double forward = sinkhorn(in.cost, in.alpha, in.beta, solver_for(in.eps)).value;
    const CostMatrix transposed(in.cost.entries.transpose(), in.cost.c_min, in.cost.c_max);
    const double backward = sinkhorn(transposed, in.beta, in.alpha, solver_for(in.eps)).value;
    return 1e-9 - std::abs(forward - backward);
  });
  r.run("ot_core", "shift_equivariance", trials, [](Xoshiro256& rng) {
    const Instance in = random_instance(rng);
    const double shift = 2.0 * rng.uniform();
    const CostMatrix shifted((in.cost.entries.array() + shift).matrix());
    const OtResult base = sinkhorn(in.cost, in.alpha, in.beta, solver_for(in.eps));
    const OtResult moved = sinkhorn(shifted, in.alpha, in.beta, solver_for(in.eps));
    const double value_gap = std::abs(base.value + shift - moved.value);
    const double plan_gap = (base.plan.entries - moved.plan.entries).cwiseAbs().maxCoeff();
    return 1e-9 - std::max(value_gap, plan_gap);
  });

  // Every fourth estimate is a pure shift of the cost, where the sup-norm
  // bound is attained.
  const auto perturbed = [](Xoshiro256& rng, int t, const Instance& in) {
    if (t % 4 == 0) return CostMatrix((in.cost.entries.array() + 0.5 * rng.uniform()).matrix());
    return CostMatrix(random_costs(rng, in.cost.rows(), in.cost.cols()));
  };
  const auto report_check = [&](const char* name, BoundCheck StabilityReport::* member) {
    auto counter = std::make_shared<int>(0);
    r.run("ot_core", name, trials, [=](Xoshiro256& rng) {
      const Instance in = random_instance(rng);
      const CostMatrix estimate = perturbed(rng, (*counter)++, in);
      const StabilityReport rep = stability_report(in.cost, estimate, in.alpha, in.beta, in.eps);
      return bound_slack(rep.*member, scale);
    });
  };
  report_check("sup_norm_bound", &StabilityReport::sup_norm);
  report_check("spectral_bound", &StabilityReport::spectral);
  report_check("plan_bound", &StabilityReport::plan);
  report_check("kernel_bound", &StabilityReport::kernel_frobenius);

  r.run("ot_core", "unregularized_sup_norm", trials, [=](Xoshiro256& rng) {
    const int n = draw_size(rng, 6);
    const CostMatrix cost(random_costs(rng, n, n));
    const CostMatrix estimate(random_costs(rng, n, n));
    const auto uniform = DiscreteDistribution::uniform(n);
    return bound_slack(stability_report(cost, estimate, uniform, uniform, 0.0).sup_norm, scale);
  });
  r.run("ot_core", "potential_box", trials, [=](Xoshiro256& rng) {
    const Instance in = random_instance(rng);
    return potential_box_slack(in.cost, in.alpha, in.beta, in.eps, scale);
  });
  r.run("ot_core", "strong_concavity", trials, [=](Xoshiro256& rng) {
    const Instance in = random_instance(rng);
    return strong_concavity_slack(in.cost, in.alpha, in.beta, in.eps, rng,
                                  kStrongConcavityConstant, 100, scale);
  });
  r.run("ot_core", "entropic_bias", trials, [=](Xoshiro256& rng) {
    const int n = draw_size(rng, 6);
    constexpr double kBiasEps[] = {1e-3, 1e-2, 1e-1};
    const double eps = kBiasEps[rng() % 3];
    const CostMatrix cost(random_costs(rng, n, n));
    const auto uniform = DiscreteDistribution::uniform(n);
    const double entropic = sinkhorn(cost, uniform, uniform, solver_for(eps)).value;
    return scale * eps * std::log(static_cast<double>(n)) + 1e-6 -
           std::abs(entropic - exact_ot_assignment(cost));
  });
}

void estimator_properties(Runner& r, int trials) {
  const int graph_trials = std::min(trials, 10);
  const double scale = r.scale();

  r.run("cost_estimators", "hop_lower_bound", graph_trials, [](Xoshiro256& rng) {
    const auto latents = sample_latents(ManifoldSpec::unit_square(), DensitySpec::uniform(), 8, 8,
                                        300, RngSeed{rng()});
    const double h = 0.15;
    const HopMatrix hops = hop_counts(eps_graph(latents, h), index_range(0, 8), index_range(8, 16));
    double worst = INFINITY;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        if (hops.entries(i, j) == HopMatrix::kUnreachable) continue;
        worst = std::min(worst, h * hops.entries(i, j) - (latents.x(i) - latents.y(j)).norm() + 1e-12);
      }
    }
    return std::isinf(worst) ? NAN : worst;
  });
  r.run("cost_estimators", "hop_symmetry", graph_trials, [](Xoshiro256& rng) {
    const auto latents =
        sample_latents(ManifoldSpec::sphere(), DensitySpec::uniform(), 6, 6, 300, RngSeed{rng()});
    const Graph g = eps_graph(latents, 0.3);
    const HopMatrix forward = hop_counts(g, index_range(0, 6), index_range(6, 12));
    const HopMatrix backward = hop_counts(g, index_range(6, 12), index_range(0, 6));
    return forward.entries == backward.entries.transpose() ? 0.0 : -1.0;
  });
  r.run("cost_estimators", "usvt_symmetric_clamped", graph_trials, [](Xoshiro256& rng) {
    const double rho = 0.3 + 0.7 * rng.uniform();
    const auto kernel = NonlocalKernel::gaussian(2, 0.5, rho);
    const auto latents =
        sample_latents(ManifoldSpec::unit_square(), DensitySpec::uniform(), 0, 0, 80, RngSeed{rng()});
    const Graph g = sample_kernel_graph(latents, kernel, RngSeed{rng()});
    const Matrix w = usvt(g.adjacency_matrix(), {1.0, rho, 0.0, 1.0});
    const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
    const double outside = std::max(-w.minCoeff(), w.maxCoeff() - 1.0);
    return 1e-12 - std::max(asym, outside);
  });
  r.run("cost_estimators", "usvt_idempotent", graph_trials, [](Xoshiro256& rng) {
    const int size = 64;
    std::vector<double> signs(size);
    for (int i = 0; i < size; ++i) signs[i] = i < size / 2 ? 1.0 : -1.0;
    std::shuffle(signs.begin(), signs.end(), rng);
    const Vector u = Eigen::Map<const Vector>(signs.data(), size);
    const double c = 0.15 + 0.15 * rng.uniform();
    const double rho = 0.3 + 0.7 * rng.uniform();
    const Matrix clean = (Matrix::Constant(size, size, 0.5) + c * u * u.transpose());
    const Matrix out = usvt(rho * clean, {1.0, rho, 0.0, 1.0});
    return 1e-8 - (out - clean).cwiseAbs().maxCoeff();
  });
  r.run("cost_estimators", "fast_block_levels", graph_trials, [](Xoshiro256& rng) {
    const double rho = 0.2 + 0.8 * rng.uniform();
    const auto latents =
        sample_latents(ManifoldSpec::unit_square(), DensitySpec::uniform(), 10, 20, 60, RngSeed{rng()});
    const Graph g = sample_kernel_graph(latents, NonlocalKernel::gaussian(2, 0.5, rho), RngSeed{rng()});
    const Matrix k = fast_kernel_block(g, rho, 10, 20);
    return ((k.array() == 0.0) || (k.array() == 1.0 / rho)).all() ? 0.0 : -1.0;
  });
  r.run("cost_estimators", "local_end_to_end", graph_trials, [=](Xoshiro256& rng) {
    const int nodes = 3000;
    const auto sphere = ManifoldSpec::sphere();
    const auto latents =
        sample_latents(sphere, DensitySpec::uniform(), 20, 20, nodes, RngSeed{rng()});
    const double h = h_schedule(nodes, 2, 1.0);
    Matrix d_hat;
    try {
      d_hat = geodesic_estimate(
          hop_counts(eps_graph(latents, h), index_range(0, 20), index_range(20, 40)), h);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::TargetsDisconnected) return static_cast<double>(NAN);
      throw;
    }
    Matrix d(20, 20);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) d(i, j) = true_geodesic(sphere, latents.x(i), latents.y(j));
    const CostMap f = CostMap::identity(sphere.diameter());
    const double eps = 0.1 * sphere.diameter();
    const auto uniform = DiscreteDistribution::uniform(20);
    const double w = sinkhorn(cost_from_distances(d, f), uniform, uniform, solver_for(eps)).value;
    const double w_hat = sinkhorn(cost_from_distances(d_hat, f), uniform, uniform, solver_for(eps)).value;
    return scale * f.lipschitz_constant() * sup_norm(d_hat - d) + 1e-9 - std::abs(w - w_hat);
  });
}

}  // namespace

bool PropertyReport::passed() const { return total_failures() == 0; }

int PropertyReport::total_failures() const {
  int total = 0;
  for (const auto& o : outcomes) total += o.failures;
  return total;
}

std::string PropertyReport::format() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %-26s %7s %9s %14s\n", "module", "property", "checks",
                "failures", "worst_slack");
  out += line;
  for (const auto& o : outcomes) {
    std::snprintf(line, sizeof line, "%-16s %-26s %7d %9d %14.6g\n", o.module.c_str(),
                  o.name.c_str(), o.checks, o.failures, o.checks ? o.worst_slack : 0.0);
    out += line;
  }
  std::snprintf(line, sizeof line, "%s: %d failure(s)\n", passed() ? "PASS" : "FAIL", total_failures());
  out += line;
  return out;
}

double potential_box_slack(const CostMatrix& cost, const DiscreteDistribution& alpha,
                           const DiscreteDistribution& beta, double epsilon, double scale) {
  const OtResult res = sinkhorn(cost, alpha, beta, solver_for(epsilon));
  const GibbsKernel k = gibbs_kernel(cost, epsilon);
  const Vector& f = res.potentials.f;
  const Vector& g = res.potentials.g;
  // max(||f + c||, ||g - c||) = max(a + c, b - c), minimized at c = (b - a) / 2.
  const double a = std::max(f.maxCoeff(), -g.minCoeff());
  const double b = std::max(-f.minCoeff(), g.maxCoeff());
  const double radius = epsilon * std::log(std::sqrt(k.delta_max) / k.delta_min);
  return scale * radius + 1e-6 - 0.5 * (a + b);
}

double strong_concavity_slack(const CostMatrix& cost, const DiscreteDistribution& alpha,
                              const DiscreteDistribution& beta, double epsilon, Xoshiro256& rng,
                              double constant, int samples, double scale) {
  const double c_bar = cost.c_max - cost.c_min;
  const CostMatrix shifted((cost.entries.array() - cost.c_min).matrix(), 0.0, c_bar);
  const OtResult res = sinkhorn(shifted, alpha, beta, solver_for(epsilon));
  const GibbsKernel k = gibbs_kernel(shifted, epsilon);
  const double optimum = dual_value(k, alpha, beta, res.potentials);
  const double factor = constant * epsilon * std::exp(2.0 * c_bar / epsilon);

  double worst = INFINITY;
  for (int s = 0; s < samples; ++s) {
    DualPotentials pot{Vector(alpha.size()), Vector(beta.size())};
    for (Eigen::Index i = 0; i < pot.f.size(); ++i) pot.f[i] = c_bar * (2.0 * rng.uniform() - 1.0);
    for (Eigen::Index j = 0; j < pot.g.size(); ++j) pot.g[j] = c_bar * (2.0 * rng.uniform() - 1.0);
    double lhs = 0.0;
    for (Eigen::Index i = 0; i < pot.f.size(); ++i) {
      for (Eigen::Index j = 0; j < pot.g.size(); ++j) {
        const double diff = pot.f[i] + pot.g[j] - res.potentials.f[i] - res.potentials.g[j];
        lhs += k.entries(i, j) * alpha.weights[i] * beta.weights[j] * diff * diff;
      }
    }
    const double rhs = scale * factor * (optimum - dual_value(k, alpha, beta, pot)) + 1e-8;
    worst = std::min(worst, rhs - lhs);
  }
  return worst;
}

PropertyReport run_property_suite(const PropertyOptions& options) {
  require(options.trials >= 1, ErrorKind::InvalidParameter, "property suite: trials must be >= 1");
  require(options.bound_scale > 0.0, ErrorKind::InvalidParameter,
          "property suite: bound_scale must be positive");
  Runner runner(options);
  ot_core_properties(runner, options.trials);
  estimator_properties(runner, options.trials);
  return runner.take();
}

}  // namespace latent_ot
