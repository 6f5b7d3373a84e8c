#pragma once

#include "latent_ot/ot_core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace latent_ot {

/// Largest singular value by power iteration on M'M, started from the
/// normalized all-ones vector. Throws NumericFailure after 1e5 iterations.
double operator_norm(const Matrix& m, double tolerance = 1e-12);

double sup_norm(const Matrix& m);

struct DiscrepancyReport {
  double sup_norm = 0.0;
  double frobenius = 0.0;
  double frobenius_normalized = 0.0;
  double operator_norm = 0.0;
  std::string normalization = "sqrt(nm)";
};

/// Norms of C - Chat. Frobenius is normalized by sqrt(rows * cols) unless a
/// divisor is given (e.g. N for the USVT display).
DiscrepancyReport discrepancy(const Matrix& c, const Matrix& c_hat);
DiscrepancyReport discrepancy(const Matrix& c, const Matrix& c_hat, double divisor,
                              std::string label);

struct RateFit {
  std::vector<std::pair<double, double>> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log(value) on log(N).
RateFit fit_rate(std::vector<std::pair<double, double>> points);

}  // namespace latent_ot
