#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace latent_ot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Probability weights over one node group. Zero-mass atoms are allowed here
/// and stripped by the solvers.
struct DiscreteDistribution {
  Vector weights;

  DiscreteDistribution() = default;
  /// Throws InvalidParameter unless weights are nonnegative and sum to 1
  /// within 1e-12.
  explicit DiscreteDistribution(Vector w);

  static DiscreteDistribution uniform(Eigen::Index size);

  Eigen::Index size() const { return weights.size(); }
  bool is_uniform() const;
};

/// Rectangular cost with bounds covering every entry.
struct CostMatrix {
  Matrix entries;
  double c_min = 0.0;
  double c_max = 0.0;

  CostMatrix() = default;
  /// Bounds taken as the tight min/max of the entries.
  explicit CostMatrix(Matrix c);
  /// Throws InvalidParameter if any entry falls outside [lo, hi] or lo < 0.
  CostMatrix(Matrix c, double lo, double hi);

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

/// K = exp(-C/eps), or an estimate of it. Estimates may contain zeros and
/// entries above one, so bounds are only meaningful for true kernels.
struct GibbsKernel {
  Matrix entries;
  double delta_min = 0.0;
  double delta_max = 0.0;
  double epsilon = 1.0;

  /// Wraps an arbitrary nonnegative matrix (e.g. a rescaled adjacency block).
  static GibbsKernel estimate(Matrix k, double epsilon);
};

struct DualPotentials {
  Vector f;
  Vector g;
};

struct TransportPlan {
  Matrix entries;
};

struct SolverConfig {
  double epsilon = 1.0;
  /// Box bound for the constrained dual; absent means unconstrained.
  std::optional<double> eta;
  int max_iterations = 100000;
  /// l1 marginal violation accepted by sinkhorn.
  double marginal_tolerance = 1e-9;
  /// Relative change of the dual value accepted by dual_ascent_boxed.
  double value_tolerance = 1e-13;
};

struct OtResult {
  double value = 0.0;       // primal <P,C> + eps KL(P | a x b)
  double dual_value = 0.0;  // dual objective at the returned potentials
  TransportPlan plan;
  DualPotentials potentials;
  int iterations = 0;
  bool converged = false;
};

struct BoxedDualResult {
  double value = 0.0;
  DualPotentials potentials;
  int iterations = 0;
  bool converged = false;
};

GibbsKernel gibbs_kernel(const CostMatrix& cost, double epsilon);

/// Entropic OT through log-domain Sinkhorn (f-block first, then g-block).
/// Stops when the l1 row-marginal violation drops below
/// cfg.marginal_tolerance; column marginals are exact after every sweep.
OtResult sinkhorn(const CostMatrix& cost, const DiscreteDistribution& alpha,
                  const DiscreteDistribution& beta, const SolverConfig& cfg);

/// Unregularized OT value for uniform marginals on a square cost:
/// (1/n) min over permutations of sum_i C(i, pi(i)).
double exact_ot_assignment(const CostMatrix& cost);

/// a'f + b'g - eps (a.e^{f/eps})' K (b.e^{g/eps}) + eps, eps taken from K.
double dual_value(const GibbsKernel& kernel, const DiscreteDistribution& alpha,
                  const DiscreteDistribution& beta, const DualPotentials& pot);

/// Block-coordinate ascent on the dual restricted to
/// ||f||_inf, ||g||_inf <= eps log(eta), each block update followed by an
/// entrywise clamp. Accepts kernels with zero entries; with an unbounded box
/// an all-zero row or column throws UnboundedDual.
BoxedDualResult dual_ascent_boxed(const GibbsKernel& kernel,
                                  const DiscreteDistribution& alpha,
                                  const DiscreteDistribution& beta,
                                  const SolverConfig& cfg);

/// Sum P log(P/Q) with 0 log 0 = 0; +inf when Q vanishes where P does not.
double kl_plans(const TransportPlan& p, const TransportPlan& q);

/// Shifts (f + c, g - c) so that a'f = b'g. The dual value is unchanged.
DualPotentials center_potentials(const DualPotentials& pot,
                                 const DiscreteDistribution& alpha,
                                 const DiscreteDistribution& beta);

/// <P,C> + eps KL(P | a x b) for an arbitrary plan.
double primal_objective(const CostMatrix& cost, const DiscreteDistribution& alpha,
                        const DiscreteDistribution& beta, const TransportPlan& plan,
                        double epsilon);

/// One inequality lhs <= rhs. Not applicable when the regularization is zero
/// and the bound only exists for eps > 0.
struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool applicable = true;

  double slack() const { return rhs - lhs; }
  bool holds(double tolerance = 1e-9) const;
};

struct StabilityReport {
  double value_true = 0.0;
  double value_estimate = 0.0;
  double plan_kl = 0.0;  // KL(P^C | P^Chat); NaN at eps = 0

  BoundCheck sup_norm;         // |W^C - W^Chat| <= ||C - Chat||_inf
  BoundCheck spectral;         // value gap vs the kernel operator-norm bound
  BoundCheck plan;             // plan KL vs the Frobenius + kernel bound
  BoundCheck kernel_frobenius; // ||K - Khat|| <= eps^-1 e^{-cmin/eps} ||C - Chat||_F

  bool all_hold(double tolerance = 1e-9) const;
};

/// Realized value/plan perturbations together with the four bound values.
/// Bounds use the shared range [min c_min, max c_max] of both matrices and
/// Euclidean norms of the marginals. eps = 0 is accepted for square uniform
/// problems; only the sup-norm check applies there.
StabilityReport stability_report(const CostMatrix& cost, const CostMatrix& estimate,
                                 const DiscreteDistribution& alpha,
                                 const DiscreteDistribution& beta, double epsilon,
                                 const SolverConfig& solver = {});

}  // namespace latent_ot
