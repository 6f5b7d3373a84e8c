#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latent_ot/diagnostics.hpp"
#include "latent_ot/error.hpp"
#include "latent_ot/ot_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace latent_ot;

namespace {

Matrix random_matrix(std::mt19937_64& gen, int rows, int cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = u(gen);
  return m;
}

DiscreteDistribution random_simplex(std::mt19937_64& gen, int size) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vector w(size);
  for (int i = 0; i < size; ++i) w[i] = u(gen);
  w /= w.sum();
  // Renormalize once more so the sum is 1 to the last bit that matters.
  w[size - 1] = 1.0 - (w.sum() - w[size - 1]);
  return DiscreteDistribution(w);
}

// 1-D oracle for the symmetric 2x2 family: plans [[t, .5-t], [.5-t, t]].
// Nested grid search, each level zooming into +-2 cells, until the cell is
// below 1e-8.
double two_by_two_oracle(double eps) {
  auto objective = [eps](double t) {
    return (1.0 - 2.0 * t) +
           eps * (2.0 * t * std::log(4.0 * t) + 2.0 * (0.5 - t) * std::log(4.0 * (0.5 - t)));
  };
  double lo = 1e-15, hi = 0.5 - 1e-15;
  double best_t = lo, best = objective(lo);
  while (true) {
    const double step = (hi - lo) / 1000.0;
    for (int k = 0; k <= 1000; ++k) {
      const double t = lo + step * k;
      const double v = objective(t);
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    if (step < 1e-8) break;
    lo = std::max(best_t - 2 * step, 1e-15);
    hi = std::min(best_t + 2 * step, 0.5 - 1e-15);
  }
  return best;
}

// Brute-force assignment by enumerating permutations.
double enumerate_assignment(const Matrix& c) {
  std::vector<int> perm(c.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < c.rows(); ++i) total += c(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(c.rows());
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

SolverConfig with_eps(double eps) {
  SolverConfig cfg;
  cfg.epsilon = eps;
  return cfg;
}

}  // namespace

TEST_CASE("distributions validate the simplex") {
  CHECK_THROWS_AS(DiscreteDistribution(Vector::Constant(2, 0.6)), Error);
  Vector negative(2);
  negative << 1.5, -0.5;
  CHECK_THROWS_AS(DiscreteDistribution{negative}, Error);
  CHECK(DiscreteDistribution::uniform(4).is_uniform());
}

TEST_CASE("gibbs_kernel examples") {
  Matrix zero(1, 1);
  zero << 0.0;
  CHECK(gibbs_kernel(CostMatrix(zero), 1.0).entries(0, 0) == 1.0);

  Matrix c(2, 2);
  c << 0, 1, 1, 0;
  const GibbsKernel k = gibbs_kernel(CostMatrix(c), 1.0);
  CHECK(k.entries(0, 1) == doctest::Approx(0.3678794412).epsilon(1e-10));
  CHECK(k.entries(0, 0) == 1.0);
  CHECK(k.delta_min == doctest::Approx(std::exp(-1.0)));
  CHECK(k.delta_max == 1.0);

  const GibbsKernel shifted = gibbs_kernel(CostMatrix((c.array() + 2.0).matrix()), 1.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(shifted.entries(i, j) == doctest::Approx(k.entries(i, j) * std::exp(-2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(gibbs_kernel(CostMatrix(c), 0.0), Error);
}

TEST_CASE("sinkhorn trivial instances") {
  Matrix five(1, 1);
  five << 5.0;
  const auto single = DiscreteDistribution::uniform(1);
  const OtResult one = sinkhorn(CostMatrix(five), single, single, with_eps(1.0));
  CHECK(one.converged);
  CHECK(one.value == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(one.plan.entries(0, 0) == doctest::Approx(1.0));

  const auto half = DiscreteDistribution::uniform(2);
  const OtResult constant =
      sinkhorn(CostMatrix(Matrix::Constant(2, 2, 3.0)), half, half, with_eps(1.0));
  CHECK(constant.value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK((constant.plan.entries.array() - 0.25).abs().maxCoeff() < 1e-12);
}

TEST_CASE("sinkhorn matches the 1-D oracle on the symmetric 2x2 family") {
  // Frozen from the grid-search oracle (cross-checked with a 30-digit run).
  const double frozen_eps1 = 0.379885493041722;
  const double frozen_eps05 = 0.283109584758486;
  CHECK(two_by_two_oracle(1.0) == doctest::Approx(frozen_eps1).epsilon(1e-9));
  CHECK(two_by_two_oracle(0.5) == doctest::Approx(frozen_eps05).epsilon(1e-9));

  Matrix c(2, 2);
  c << 0, 1, 1, 0;
  const auto half = DiscreteDistribution::uniform(2);
  for (double eps : {1.0, 0.5, 0.1}) {
    const OtResult r = sinkhorn(CostMatrix(c), half, half, with_eps(eps));
    CHECK(r.converged);
    CHECK(std::abs(r.value - two_by_two_oracle(eps)) < 1e-6);
  }
}

TEST_CASE("sinkhorn rejects bad inputs") {
  const auto a = DiscreteDistribution::uniform(2);
  const auto b = DiscreteDistribution::uniform(3);
  CHECK_THROWS_AS(sinkhorn(CostMatrix(Matrix::Ones(2, 2)), a, b, with_eps(1.0)), Error);
  CHECK_THROWS_AS(sinkhorn(CostMatrix(Matrix::Ones(2, 3)), a, b, with_eps(0.0)), Error);
}

TEST_CASE("sinkhorn reports non-convergence instead of throwing") {
  std::mt19937_64 gen(5);
  const auto a = random_simplex(gen, 4);
  const auto b = random_simplex(gen, 4);
  SolverConfig cfg = with_eps(0.01);
  cfg.max_iterations = 2;
  const OtResult r = sinkhorn(CostMatrix(random_matrix(gen, 4, 4, 0.0, 1.0)), a, b, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
}

TEST_CASE("zero-mass atoms are stripped") {
  std::mt19937_64 gen(11);
  const Matrix c = random_matrix(gen, 3, 3, 0.0, 1.0);
  Vector a(3);
  a << 0.5, 0.0, 0.5;
  const DiscreteDistribution alpha(a);
  const auto beta = DiscreteDistribution::uniform(3);
  const OtResult full = sinkhorn(CostMatrix(c), alpha, beta, with_eps(0.5));

  Matrix reduced(2, 3);
  reduced << c.row(0), c.row(2);
  const OtResult small =
      sinkhorn(CostMatrix(reduced), DiscreteDistribution::uniform(2), beta, with_eps(0.5));
  CHECK(full.converged);
  CHECK(full.value == doctest::Approx(small.value).epsilon(1e-10));
  CHECK(full.plan.entries.row(1).isZero(0.0));
  CHECK(full.potentials.f.allFinite());
}

TEST_CASE("exact_ot_assignment") {
  Matrix c(2, 2);
  c << 0, 1, 1, 0;
  CHECK(exact_ot_assignment(CostMatrix(c)) == 0.0);
  CHECK(exact_ot_assignment(CostMatrix(Matrix::Constant(4, 4, 0.7))) == doctest::Approx(0.7));
  CHECK_THROWS_AS(exact_ot_assignment(CostMatrix(Matrix::Ones(2, 3))), Error);

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 8;
    const Matrix r = random_matrix(gen, n, n, 0.0, 1.0);
    CHECK(exact_ot_assignment(CostMatrix(r)) == doctest::Approx(enumerate_assignment(r)).epsilon(1e-12));
  }
}

TEST_CASE("dual_value examples") {
  std::mt19937_64 gen(17);
  const auto a = random_simplex(gen, 3);
  const auto b = random_simplex(gen, 4);
  const GibbsKernel ones = GibbsKernel::estimate(Matrix::Ones(3, 4), 0.7);
  CHECK(std::abs(dual_value(ones, a, b, {Vector::Zero(3), Vector::Zero(4)})) < 1e-15);

  Matrix c(1, 1);
  c << 2.5;
  const auto single = DiscreteDistribution::uniform(1);
  Vector f(1), g(1);
  f << 1.0;
  g << 1.5;
  CHECK(dual_value(gibbs_kernel(CostMatrix(c), 0.3), single, single, {f, g}) ==
        doctest::Approx(2.5).epsilon(1e-12));

  const CostMatrix cost(random_matrix(gen, 4, 3, 0.0, 1.0));
  const auto a4 = random_simplex(gen, 4);
  const auto b3 = random_simplex(gen, 3);
  const OtResult r = sinkhorn(cost, a4, b3, with_eps(0.2));
  CHECK(rel_diff(dual_value(gibbs_kernel(cost, 0.2), a4, b3, r.potentials), r.value) < 1e-6);
}

TEST_CASE("dual_ascent_boxed examples") {
  std::mt19937_64 gen(23);
  const auto a = random_simplex(gen, 3);
  const auto b = random_simplex(gen, 2);
  SolverConfig cfg = with_eps(0.4);
  cfg.eta = 3.0;
  const BoxedDualResult ones =
      dual_ascent_boxed(GibbsKernel::estimate(Matrix::Ones(3, 2), 0.4), a, b, cfg);
  CHECK(std::abs(ones.value) < 1e-15);
  CHECK(ones.potentials.f.isZero(1e-15));

  const Matrix k = random_matrix(gen, 3, 2, 0.1, 1.0);
  cfg.eta = 1.0;
  const BoxedDualResult collapsed = dual_ascent_boxed(GibbsKernel::estimate(k, 0.4), a, b, cfg);
  CHECK(collapsed.potentials.f.isZero(0.0));
  CHECK(collapsed.potentials.g.isZero(0.0));
  CHECK(collapsed.value == doctest::Approx(0.4 * (1.0 - a.weights.dot(k * b.weights))).epsilon(1e-14));

  cfg.eta = 0.5;
  CHECK_THROWS_AS(dual_ascent_boxed(GibbsKernel::estimate(k, 0.4), a, b, cfg), Error);

  Matrix with_zero_row = k;
  with_zero_row.row(1).setZero();
  cfg.eta.reset();
  try {
    dual_ascent_boxed(GibbsKernel::estimate(with_zero_row, 0.4), a, b, cfg);
    FAIL("expected unbounded dual");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundedDual);
  }
  cfg.eta = 10.0;
  const BoxedDualResult boxed =
      dual_ascent_boxed(GibbsKernel::estimate(with_zero_row, 0.4), a, b, cfg);
  CHECK(boxed.potentials.f[1] == doctest::Approx(0.4 * std::log(10.0)));
}

TEST_CASE("dual_ascent_boxed with the sufficient box equals sinkhorn") {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 20; ++trial) {
    const double eps = std::vector<double>{0.1, 0.5, 1.0}[trial % 3];
    const CostMatrix cost(random_matrix(gen, 5, 4, 0.1, 1.0));
    const auto a = random_simplex(gen, 5);
    const auto b = random_simplex(gen, 4);
    SolverConfig cfg = with_eps(eps);
    cfg.eta = std::exp((cost.c_max - cost.c_min / 2.0) / eps);
    const BoxedDualResult boxed = dual_ascent_boxed(gibbs_kernel(cost, eps), a, b, cfg);
    const OtResult reference = sinkhorn(cost, a, b, cfg);
    CHECK(boxed.converged);
    CHECK(rel_diff(boxed.value, reference.value) < 1e-6);
  }
}

TEST_CASE("kl_plans examples") {
  Matrix p(2, 2), q(2, 2);
  p << 0.5, 0, 0, 0.5;
  q << 0.25, 0.25, 0.25, 0.25;
  CHECK(kl_plans({p}, {p}) == 0.0);
  CHECK(kl_plans({p}, {q}) == doctest::Approx(0.6931471806).epsilon(1e-10));
  CHECK(std::isinf(kl_plans({q}, {p})));
}

TEST_CASE("center_potentials") {
  const auto half = DiscreteDistribution::uniform(2);
  const DualPotentials c = center_potentials({Vector::Ones(2), -Vector::Ones(2)}, half, half);
  CHECK(c.f.isZero(0.0));
  CHECK(c.g.isZero(0.0));

  const DualPotentials again = center_potentials(c, half, half);
  CHECK(again.f == c.f);

  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_simplex(gen, 4);
    const auto b = random_simplex(gen, 3);
    const GibbsKernel k = gibbs_kernel(CostMatrix(random_matrix(gen, 4, 3, 0.0, 1.0)), 0.5);
    const DualPotentials pot{random_matrix(gen, 4, 1, -1, 1), random_matrix(gen, 3, 1, -1, 1)};
    const DualPotentials centered = center_potentials(pot, a, b);
    CHECK(a.weights.dot(centered.f) == doctest::Approx(b.weights.dot(centered.g)).epsilon(1e-12));
    CHECK(std::abs(dual_value(k, a, b, pot) - dual_value(k, a, b, centered)) < 1e-12);
  }
}

TEST_CASE("sinkhorn invariants on random instances") {
  std::mt19937_64 gen(37);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 6;
    const int m = 1 + (trial / 6) % 6;
    const double eps = std::vector<double>{0.05, 0.2, 1.0}[trial % 3];
    const CostMatrix cost(random_matrix(gen, n, m, 0.0, 1.0));
    const auto a = random_simplex(gen, n);
    const auto b = random_simplex(gen, m);
    const OtResult r = sinkhorn(cost, a, b, with_eps(eps));
    REQUIRE(r.converged);

    const Matrix& p = r.plan.entries;
    CHECK((p.rowwise().sum() - a.weights).lpNorm<1>() <= 1e-9);
    CHECK((p.colwise().sum().transpose() - b.weights).lpNorm<1>() <= 1e-9);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-9);

    // Plan factorization through the returned (centered) potentials.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double rebuilt = a.weights[i] * b.weights[j] *
                               std::exp((r.potentials.f[i] + r.potentials.g[j] - cost.entries(i, j)) / eps);
        CHECK(rel_diff(rebuilt, p(i, j)) <= 1e-9);
      }
    }
    CHECK(rel_diff(r.value, r.dual_value) <= 1e-6);
    CHECK(rel_diff(r.value, primal_objective(cost, a, b, r.plan, eps)) <= 1e-12);

    // Symmetry and shift equivariance.
    const OtResult transposed =
        sinkhorn(CostMatrix(Matrix(cost.entries.transpose())), b, a, with_eps(eps));
    CHECK(std::abs(transposed.value - r.value) <= 1e-9);
    const OtResult shifted =
        sinkhorn(CostMatrix((cost.entries.array() + 0.75).matrix()), a, b, with_eps(eps));
    CHECK(std::abs(shifted.value - (r.value + 0.75)) <= 1e-9);
    CHECK((shifted.plan.entries - p).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("entropic bias against the exact assignment at small eps") {
  std::mt19937_64 gen(41);
  for (int n = 1; n <= 8; ++n) {
    const CostMatrix cost(random_matrix(gen, n, n, 0.0, 1.0));
    const auto u = DiscreteDistribution::uniform(n);
    const double eps = 1e-3;
    const OtResult r = sinkhorn(cost, u, u, with_eps(eps));
    const double exact = exact_ot_assignment(cost);
    CHECK(r.value >= exact - 1e-6);
    CHECK(std::abs(r.value - exact) <= eps * std::log(static_cast<double>(n)) + 1e-6);
  }
}

TEST_CASE("stability_report examples") {
  std::mt19937_64 gen(43);
  const CostMatrix cost(random_matrix(gen, 4, 5, 0.1, 1.0));
  const auto a = random_simplex(gen, 4);
  const auto b = random_simplex(gen, 5);

  const StabilityReport same = stability_report(cost, cost, a, b, 0.5);
  CHECK(same.sup_norm.lhs == 0.0);
  CHECK(same.sup_norm.rhs == 0.0);
  CHECK(same.spectral.rhs == 0.0);
  CHECK(same.plan.rhs == 0.0);
  CHECK(same.kernel_frobenius.rhs == 0.0);
  CHECK(std::abs(same.plan_kl) < 1e-15);
  CHECK(same.all_hold());

  const CostMatrix shifted((cost.entries.array() + 0.5).matrix());
  const StabilityReport shift = stability_report(cost, shifted, a, b, 0.5);
  CHECK(shift.sup_norm.lhs == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(shift.sup_norm.rhs == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(shift.plan_kl) < 1e-10);
  CHECK(shift.all_hold());

  const auto u = DiscreteDistribution::uniform(4);
  const CostMatrix square(random_matrix(gen, 4, 4, 0.1, 1.0));
  const CostMatrix square_hat(random_matrix(gen, 4, 4, 0.1, 1.0));
  const StabilityReport zero = stability_report(square, square_hat, u, u, 0.0);
  CHECK_FALSE(zero.spectral.applicable);
  CHECK(zero.sup_norm.holds());
  CHECK_THROWS_AS(stability_report(cost, cost, a, b, 0.0), Error);
}

TEST_CASE("stability bounds hold on a random sweep") {
  std::mt19937_64 gen(47);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 5;
    const int m = 1 + (trial / 5) % 5;
    const double eps = trial % 2 == 0 ? 0.1 : 1.0;
    const CostMatrix c(random_matrix(gen, n, m, 0.1, 1.0));
    const CostMatrix c_hat(random_matrix(gen, n, m, 0.1, 1.0));
    const StabilityReport report =
        stability_report(c, c_hat, random_simplex(gen, n), random_simplex(gen, m), eps);
    CHECK(report.sup_norm.slack() >= -1e-9);
    CHECK(report.spectral.holds());
    CHECK(report.plan.holds());
    CHECK(report.kernel_frobenius.holds());
  }
}
