#include "latent_ot/ot_core.hpp"

#include "latent_ot/diagnostics.hpp"
#include "latent_ot/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace latent_ot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNewtonAfterSweeps = 100;
constexpr Eigen::Index kNewtonMaxRows = 2000;

// Relative comparison used to detect stalled value sequences.
double relative_gap(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// log sum_k exp(terms_k); returns -inf when every term is -inf.
template <typename Terms>
double log_sum_exp(const Terms& terms) {
  const double top = terms.maxCoeff();
  if (top == -kInf) return -kInf;
  return top + std::log((terms.array() - top).exp().sum());
}

// Indices of strictly positive weights.
std::vector<Eigen::Index> support_of(const Vector& w) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) support.push_back(i);
  }
  return support;
}

// Dual block-coordinate ascent in the log domain on a generic log-kernel
// (entries may be -inf). Rows of log_kernel index the alpha side.
struct LogDomainAscent {
  const Matrix& log_kernel;  // n x m
  Matrix log_kernel_t;       // m x n, contiguous access for the f update
  Vector a;
  Vector b;
  Vector log_a;
  Vector log_b;
  double eps;
  double bound;  // box radius eps*log(eta), +inf when unconstrained

  LogDomainAscent(const Matrix& lk, const Vector& a_weights, const Vector& b_weights, double epsilon,
                  double box)
      : log_kernel(lk),
        log_kernel_t(lk.transpose()),
        a(a_weights),
        b(b_weights),
        log_a(a_weights.array().log()),
        log_b(b_weights.array().log()),
        eps(epsilon),
        bound(box) {}

  double clamp(double v) const { return std::clamp(v, -bound, bound); }

  // f_i = -eps log sum_j b_j K_ij e^{g_j/eps}, clamped.
  void update_f(const Vector& g, Vector& f) const {
    const Vector shifted = log_b + g / eps;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const double lse = log_sum_exp(log_kernel_t.col(i) + shifted);
      if (lse == -kInf && bound == kInf) {
        fail(ErrorKind::UnboundedDual, "dual ascent: kernel row " + std::to_string(i) +
                                           " is zero and the box is unbounded");
      }
      f[i] = clamp(-eps * lse);
    }
  }

  void update_g(const Vector& f, Vector& g) const {
    const Vector shifted = log_a + f / eps;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      const double lse = log_sum_exp(log_kernel.col(j) + shifted);
      if (lse == -kInf && bound == kInf) {
        fail(ErrorKind::UnboundedDual, "dual ascent: kernel column " + std::to_string(j) +
                                           " is zero and the box is unbounded");
      }
      g[j] = clamp(-eps * lse);
    }
  }

  // a'f + b'g(f) where g(f) = update_g(f), i.e. the dual with the g-block
  // maximized out.
  double semi_dual(const Vector& f, Vector& g) const {
    update_g(f, g);
    return a.dot(f) + b.dot(g);
  }

  // Damped Newton step on the semi-dual in f. Returns false when no ascent
  // step is found, leaving f and g untouched.
  bool newton_step(Vector& f, Vector& g) const {
    const Eigen::Index n = f.size();
    Matrix plan(n, g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        plan(i, j) = std::exp(log_a[i] + log_b[j] + log_kernel(i, j) + (f[i] + g[j]) / eps);
      }
    }
    const Vector r = plan.rowwise().sum();
    const Vector grad = a - r;
    // Hessian of the semi-dual is -(diag(r) - P diag(1/b) P')/eps, singular
    // along the all-ones gauge direction; the rank-one term removes it.
    Matrix h = -(plan * b.cwiseInverse().asDiagonal() * plan.transpose());
    h.diagonal() += r;
    h.array() += r.mean() / static_cast<double>(n);
    const Vector dir = h.ldlt().solve(eps * grad);
    const double slope = grad.dot(dir);
    if (!dir.allFinite() || !(slope > 0.0)) return false;

    Vector g_trial(g.size());
    const double base = a.dot(f) + b.dot(g);
    for (double step = 1.0; step > 1e-10; step *= 0.5) {
      const Vector f_trial = f + step * dir;
      const double value = semi_dual(f_trial, g_trial);
      if (value >= base + 1e-4 * step * slope) {
        f = f_trial;
        g = g_trial;
        return true;
      }
    }
    return false;
  }

  // Dual objective, computed as sum exp(log a + log b + log K + (f+g)/eps).
  double value(const Vector& f, const Vector& g) const {
    double mass = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double lk = log_kernel(i, j);
        if (lk == -kInf) continue;
        mass += std::exp(log_a[i] + log_b[j] + lk + (f[i] + g[j]) / eps);
      }
    }
    return a.dot(f) + b.dot(g) - eps * mass + eps;
  }
};

Matrix restrict(const Matrix& m, const std::vector<Eigen::Index>& rows,
                const std::vector<Eigen::Index>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

Vector restrict(const Vector& v, const std::vector<Eigen::Index>& idx) {
  Vector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

void check_dimensions(Eigen::Index rows, Eigen::Index cols, const DiscreteDistribution& alpha,
                      const DiscreteDistribution& beta, const char* who) {
  require(rows == alpha.size() && cols == beta.size(), ErrorKind::InvalidParameter,
          std::string(who) + ": dimension mismatch");
  require(rows > 0 && cols > 0, ErrorKind::InvalidParameter, std::string(who) + ": empty problem");
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(Vector w) : weights(std::move(w)) {
  require(weights.size() > 0, ErrorKind::InvalidParameter, "distribution: empty");
  require((weights.array() >= 0.0).all() && weights.allFinite(), ErrorKind::InvalidParameter,
          "distribution: weights must be finite and nonnegative");
  require(std::abs(weights.sum() - 1.0) <= 1e-12, ErrorKind::InvalidParameter,
          "distribution: weights must sum to 1");
}

DiscreteDistribution DiscreteDistribution::uniform(Eigen::Index size) {
  require(size > 0, ErrorKind::InvalidParameter, "distribution: empty");
  return DiscreteDistribution(Vector::Constant(size, 1.0 / static_cast<double>(size)));
}

bool DiscreteDistribution::is_uniform() const {
  const double target = 1.0 / static_cast<double>(size());
  return ((weights.array() - target).abs() <= 1e-15).all();
}

CostMatrix::CostMatrix(Matrix c) : entries(std::move(c)) {
  require(entries.size() > 0, ErrorKind::InvalidParameter, "cost: empty matrix");
  require(entries.allFinite(), ErrorKind::InvalidParameter, "cost: non-finite entry");
  c_min = entries.minCoeff();
  c_max = entries.maxCoeff();
  require(c_min >= 0.0, ErrorKind::InvalidParameter, "cost: entries must be nonnegative");
}

CostMatrix::CostMatrix(Matrix c, double lo, double hi) : entries(std::move(c)), c_min(lo), c_max(hi) {
  require(lo >= 0.0 && lo <= hi, ErrorKind::InvalidParameter, "cost: need 0 <= c_min <= c_max");
  require(entries.allFinite(), ErrorKind::InvalidParameter, "cost: non-finite entry");
  require(entries.size() == 0 || (entries.minCoeff() >= lo && entries.maxCoeff() <= hi),
          ErrorKind::InvalidParameter, "cost: entry outside [c_min, c_max]");
}

GibbsKernel GibbsKernel::estimate(Matrix k, double epsilon) {
  require(epsilon > 0.0, ErrorKind::InvalidParameter, "kernel: epsilon must be positive");
  require(k.allFinite() && (k.array() >= 0.0).all(), ErrorKind::InvalidParameter,
          "kernel: entries must be finite and nonnegative");
  GibbsKernel kernel;
  kernel.delta_min = k.size() ? k.minCoeff() : 0.0;
  kernel.delta_max = k.size() ? k.maxCoeff() : 0.0;
  kernel.entries = std::move(k);
  kernel.epsilon = epsilon;
  return kernel;
}

GibbsKernel gibbs_kernel(const CostMatrix& cost, double epsilon) {
  require(epsilon > 0.0, ErrorKind::InvalidParameter, "gibbs_kernel: epsilon must be positive");
  GibbsKernel kernel;
  kernel.entries = (-cost.entries.array() / epsilon).exp().matrix();
  kernel.delta_min = std::exp(-cost.c_max / epsilon);
  kernel.delta_max = std::exp(-cost.c_min / epsilon);
  kernel.epsilon = epsilon;
  return kernel;
}

OtResult sinkhorn(const CostMatrix& cost, const DiscreteDistribution& alpha,
                  const DiscreteDistribution& beta, const SolverConfig& cfg) {
  check_dimensions(cost.rows(), cost.cols(), alpha, beta, "sinkhorn");
  require(cfg.epsilon > 0.0, ErrorKind::InvalidParameter, "sinkhorn: epsilon must be positive");
  require(cfg.max_iterations >= 1 && cfg.marginal_tolerance > 0.0, ErrorKind::InvalidParameter,
          "sinkhorn: invalid iteration budget or tolerance");
  const double eps = cfg.epsilon;

  // Zero-mass atoms carry no plan mass; solve on the support only.
  const auto rows = support_of(alpha.weights);
  const auto cols = support_of(beta.weights);
  const Vector a = restrict(alpha.weights, rows);
  const Vector b = restrict(beta.weights, cols);
  const Matrix log_kernel = -restrict(cost.entries, rows, cols) / eps;

  LogDomainAscent ascent(log_kernel, a, b, eps, kInf);
  Vector f = Vector::Zero(a.size());
  Vector g = Vector::Zero(b.size());
  Vector f_next(a.size());

  OtResult result;
  ascent.update_f(g, f);
  ascent.update_g(f, g);
  int iter = 1;
  for (; iter <= cfg.max_iterations; ++iter) {
    // Columns are exact after the g-block; the row sums of the current plan
    // are a_i exp((f_i - f_next_i)/eps), where f_next is the next f-block.
    ascent.update_f(g, f_next);
    const double violation =
        (a.array() * (((f - f_next).array() / eps).exp() - 1.0).abs()).sum();
    if (violation <= cfg.marginal_tolerance) {
      result.converged = true;
      break;
    }
    // Plain sweeps stall when the plan is close to a permutation; Newton
    // steps on the semi-dual take over after a fixed number of sweeps.
    const bool use_newton = iter > kNewtonAfterSweeps && a.size() <= kNewtonMaxRows;
    if (!use_newton || !ascent.newton_step(f, g)) {
      f.swap(f_next);
      ascent.update_g(f, g);
    }
  }
  result.iterations = std::min(iter, cfg.max_iterations);

  // Scatter back to the full index sets; stripped atoms get the first-order
  // potential against the other side.
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  DualPotentials pot{Vector::Zero(n), Vector::Zero(m)};
  for (std::size_t i = 0; i < rows.size(); ++i) pot.f[rows[i]] = f[i];
  for (std::size_t j = 0; j < cols.size(); ++j) pot.g[cols[j]] = g[j];
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha.weights[i] > 0.0) continue;
    Vector terms(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      terms[j] = std::log(b[j]) + (g[j] - cost.entries(i, cols[j])) / eps;
    }
    pot.f[i] = -eps * log_sum_exp(terms);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (beta.weights[j] > 0.0) continue;
    Vector terms(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      terms[i] = std::log(a[i]) + (f[i] - cost.entries(rows[i], j)) / eps;
    }
    pot.g[j] = -eps * log_sum_exp(terms);
  }
  result.potentials = center_potentials(pot, alpha, beta);

  Matrix plan = Matrix::Zero(n, m);
  double transport = 0.0;
  double entropy = 0.0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double log_ratio = (f[i] + g[j]) / eps + log_kernel(i, j);  // log P/(a b)
      const double p = a[i] * b[j] * std::exp(log_ratio);
      plan(rows[i], cols[j]) = p;
      transport += p * cost.entries(rows[i], cols[j]);
      entropy += p * log_ratio;
    }
  }
  result.plan.entries = std::move(plan);
  result.value = transport + eps * entropy;
  result.dual_value = ascent.value(f, g);
  return result;
}

double dual_value(const GibbsKernel& kernel, const DiscreteDistribution& alpha,
                  const DiscreteDistribution& beta, const DualPotentials& pot) {
  check_dimensions(kernel.entries.rows(), kernel.entries.cols(), alpha, beta, "dual_value");
  require(pot.f.size() == alpha.size() && pot.g.size() == beta.size(),
          ErrorKind::InvalidParameter, "dual_value: potential dimension mismatch");
  const double eps = kernel.epsilon;
  double mass = 0.0;
  for (Eigen::Index j = 0; j < kernel.entries.cols(); ++j) {
    for (Eigen::Index i = 0; i < kernel.entries.rows(); ++i) {
      const double k = kernel.entries(i, j);
      const double w = alpha.weights[i] * beta.weights[j];
      if (k == 0.0 || w == 0.0) continue;
      mass += w * std::exp(std::log(k) + (pot.f[i] + pot.g[j]) / eps);
    }
  }
  return alpha.weights.dot(pot.f) + beta.weights.dot(pot.g) - eps * mass + eps;
}

BoxedDualResult dual_ascent_boxed(const GibbsKernel& kernel, const DiscreteDistribution& alpha,
                                  const DiscreteDistribution& beta, const SolverConfig& cfg) {
  check_dimensions(kernel.entries.rows(), kernel.entries.cols(), alpha, beta,
                   "dual_ascent_boxed");
  require(cfg.epsilon > 0.0, ErrorKind::InvalidParameter,
          "dual_ascent_boxed: epsilon must be positive");
  require(!cfg.eta || *cfg.eta >= 1.0, ErrorKind::InvalidParameter,
          "dual_ascent_boxed: eta must be at least 1");
  require((kernel.entries.array() >= 0.0).all(), ErrorKind::InvalidParameter,
          "dual_ascent_boxed: kernel entries must be nonnegative");
  const double eps = cfg.epsilon;
  const double bound = cfg.eta ? eps * std::log(*cfg.eta) : kInf;

  const auto rows = support_of(alpha.weights);
  const auto cols = support_of(beta.weights);
  const Vector a = restrict(alpha.weights, rows);
  const Vector b = restrict(beta.weights, cols);
  const Matrix log_kernel = restrict(kernel.entries, rows, cols).array().log().matrix();

  LogDomainAscent ascent(log_kernel, a, b, eps, bound);
  Vector f = Vector::Zero(a.size());
  Vector g = Vector::Zero(b.size());
  double value = ascent.value(f, g);

  BoxedDualResult result;
  int iter = 1;
  for (; iter <= cfg.max_iterations; ++iter) {
    ascent.update_f(g, f);
    ascent.update_g(f, g);
    const double next = ascent.value(f, g);
    const bool stalled = relative_gap(next, value) < cfg.value_tolerance;
    value = next;
    if (stalled) {
      result.converged = true;
      break;
    }
  }
  result.iterations = std::min(iter, cfg.max_iterations);
  result.value = value;

  DualPotentials pot{Vector::Zero(alpha.size()), Vector::Zero(beta.size())};
  for (std::size_t i = 0; i < rows.size(); ++i) pot.f[rows[i]] = f[i];
  for (std::size_t j = 0; j < cols.size(); ++j) pot.g[cols[j]] = g[j];
  result.potentials = std::move(pot);
  return result;
}

double kl_plans(const TransportPlan& p, const TransportPlan& q) {
  require(p.entries.rows() == q.entries.rows() && p.entries.cols() == q.entries.cols(),
          ErrorKind::InvalidParameter, "kl_plans: shape mismatch");
  double kl = 0.0;
  for (Eigen::Index j = 0; j < p.entries.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.entries.rows(); ++i) {
      const double pij = p.entries(i, j);
      if (pij <= 0.0) continue;
      const double qij = q.entries(i, j);
      if (qij <= 0.0) return kInf;
      kl += pij * std::log(pij / qij);
    }
  }
  return kl;
}

DualPotentials center_potentials(const DualPotentials& pot, const DiscreteDistribution& alpha,
                                 const DiscreteDistribution& beta) {
  const double shift = (beta.weights.dot(pot.g) - alpha.weights.dot(pot.f)) / 2.0;
  return {(pot.f.array() + shift).matrix(), (pot.g.array() - shift).matrix()};
}

double primal_objective(const CostMatrix& cost, const DiscreteDistribution& alpha,
                        const DiscreteDistribution& beta, const TransportPlan& plan,
                        double epsilon) {
  check_dimensions(cost.rows(), cost.cols(), alpha, beta, "primal_objective");
  double total = 0.0;
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
      const double p = plan.entries(i, j);
      if (p <= 0.0) continue;
      total += p * cost.entries(i, j);
      if (epsilon > 0.0) {
        const double ref = alpha.weights[i] * beta.weights[j];
        if (ref <= 0.0) return kInf;
        total += epsilon * p * std::log(p / ref);
      }
    }
  }
  return total;
}

bool BoundCheck::holds(double tolerance) const {
  if (!applicable) return true;
  if (std::isnan(lhs) || std::isnan(rhs)) return false;
  if (rhs == kInf) return true;
  return slack() >= -tolerance;
}

bool StabilityReport::all_hold(double tolerance) const {
  return sup_norm.holds(tolerance) && spectral.holds(tolerance) && plan.holds(tolerance) &&
         kernel_frobenius.holds(tolerance);
}

namespace {

// exp(log_factor) * x with 0 * inf treated as 0.
double scaled(double log_factor, double x) {
  if (x == 0.0) return 0.0;
  return std::exp(log_factor + std::log(x));
}

}  // namespace

StabilityReport stability_report(const CostMatrix& cost, const CostMatrix& estimate,
                                 const DiscreteDistribution& alpha,
                                 const DiscreteDistribution& beta, double epsilon,
                                 const SolverConfig& solver) {
  require(cost.rows() == estimate.rows() && cost.cols() == estimate.cols(),
          ErrorKind::InvalidParameter, "stability_report: shape mismatch");
  require(epsilon >= 0.0, ErrorKind::InvalidParameter,
          "stability_report: epsilon must be nonnegative");
  const double c_min = std::min(cost.c_min, estimate.c_min);
  const double c_max = std::max(cost.c_max, estimate.c_max);
  const Matrix diff = cost.entries - estimate.entries;

  StabilityReport report;
  report.sup_norm.name = "sup_norm";
  report.spectral.name = "spectral";
  report.plan.name = "plan";
  report.kernel_frobenius.name = "kernel_frobenius";
  report.sup_norm.rhs = sup_norm(diff);

  if (epsilon == 0.0) {
    require(alpha.is_uniform() && beta.is_uniform() && cost.rows() == cost.cols(),
            ErrorKind::InvalidParameter,
            "stability_report: eps = 0 needs square problems with uniform marginals");
    report.value_true = exact_ot_assignment(cost);
    report.value_estimate = exact_ot_assignment(estimate);
    report.sup_norm.lhs = std::abs(report.value_true - report.value_estimate);
    report.plan_kl = std::numeric_limits<double>::quiet_NaN();
    report.spectral.applicable = false;
    report.plan.applicable = false;
    report.kernel_frobenius.applicable = false;
    return report;
  }

  SolverConfig cfg = solver;
  cfg.epsilon = epsilon;
  const OtResult exact = sinkhorn(cost, alpha, beta, cfg);
  const OtResult perturbed = sinkhorn(estimate, alpha, beta, cfg);
  report.value_true = exact.value;
  report.value_estimate = perturbed.value;
  report.plan_kl = kl_plans(exact.plan, perturbed.plan);
  const double value_gap = std::abs(exact.value - perturbed.value);
  report.sup_norm.lhs = value_gap;

  const Matrix kernel_diff =
      (-cost.entries.array() / epsilon).exp().matrix() -
      (-estimate.entries.array() / epsilon).exp().matrix();
  const double kernel_gap = kernel_diff.isZero(0.0) ? 0.0 : operator_norm(kernel_diff);
  const double frobenius = diff.norm();
  const double marginals = alpha.weights.norm() * beta.weights.norm();

  report.spectral.lhs = value_gap;
  report.spectral.rhs =
      epsilon * scaled((2.0 * c_max - c_min) / epsilon, marginals * kernel_gap);

  report.plan.lhs = report.plan_kl;
  report.plan.rhs =
      scaled(2.0 * (c_max - c_min) / epsilon, marginals * frobenius) / epsilon +
      scaled((4.0 * c_max - 3.5 * c_min) / epsilon, std::sqrt(marginals * kernel_gap));

  report.kernel_frobenius.lhs = kernel_gap;
  report.kernel_frobenius.rhs = scaled(-c_min / epsilon, frobenius) / epsilon;
  return report;
}

}  // namespace latent_ot
