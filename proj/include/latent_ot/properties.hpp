#pragma once

#include "latent_ot/ot_core.hpp"
#include "latent_ot/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace latent_ot {

struct PropertyOptions {
  std::uint64_t seed = 1;
  int trials = 100;
  /// Multiplies the right-hand side of every bound. Values below one turn
  /// the suite into a negative control.
  double bound_scale = 1.0;
};

struct PropertyOutcome {
  std::string module;
  std::string name;
  int checks = 0;
  int failures = 0;
  double worst_slack = 0.0;
};

struct PropertyReport {
  std::vector<PropertyOutcome> outcomes;

  bool passed() const;
  int total_failures() const;
  std::string format() const;
};

/// Runs the randomized invariant checks of the solver and estimator modules.
/// Graph-based checks use min(trials, 10) instances.
PropertyReport run_property_suite(const PropertyOptions& options);

/// eps log(sqrt(delta_max) / delta_min) + 1e-6 minus the smallest shift-balanced
/// sup norm of the converged potentials.
double potential_box_slack(const CostMatrix& cost, const DiscreteDistribution& alpha,
                           const DiscreteDistribution& beta, double epsilon, double scale = 1.0);

/// Constant c in  sum K a b |f + g - f* - g*|^2 <= c eps e^{2 cbar/eps} (L* - L).
/// The inequality holds with c = 2; c = 1/2 is too small and fails on some instances.
inline constexpr double kStrongConcavityConstant = 2.0;
inline constexpr double kStrongConcavityHalfConstant = 0.5;

/// Worst slack of the dual strong-concavity inequality over `samples` random
/// potentials in the box of radius c_max - c_min, after shifting costs to
/// start at zero.
double strong_concavity_slack(const CostMatrix& cost, const DiscreteDistribution& alpha,
                              const DiscreteDistribution& beta, double epsilon, Xoshiro256& rng,
                              double constant, int samples = 100, double scale = 1.0);

}  // namespace latent_ot
