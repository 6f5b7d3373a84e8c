#include "latent_ot/diagnostics.hpp"

#include "latent_ot/error.hpp"

#include <cmath>

namespace latent_ot {

namespace {

constexpr int kMaxPowerIterations = 100000;

// Deterministic fallback start when all-ones lies in the null space of M'M.
Vector restart_vector(Eigen::Index size, int attempt) {
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v[i] = std::sin(static_cast<double>((i + 1) * (attempt + 2)) * 1.618033988749895);
  }
  return v.normalized();
}

}  // namespace

double operator_norm(const Matrix& m, double tolerance) {
  require(m.rows() > 0 && m.cols() > 0, ErrorKind::InvalidParameter,
          "operator_norm: empty matrix");
  if (m.isZero(0.0)) return 0.0;

  // Work on the smaller Gram matrix.
  const bool use_rows = m.rows() < m.cols();
  const Eigen::Index dim = use_rows ? m.rows() : m.cols();

  Vector v = Vector::Ones(dim).normalized();
  double estimate = 0.0;
  int attempt = 0;
  for (int iter = 0; iter < kMaxPowerIterations; ++iter) {
    Vector w = use_rows ? Vector(m * (m.transpose() * v)) : Vector(m.transpose() * (m * v));
    const double norm = w.norm();
    if (norm == 0.0) {
      // Stagnated in the null space: restart from a different direction.
      v = restart_vector(dim, attempt++);
      continue;
    }
    // Rayleigh quotient of the Gram matrix gives sigma^2.
    const double rayleigh = v.dot(w);
    const double next = std::sqrt(std::max(rayleigh, 0.0));
    v = w / norm;
    if (iter > 0 && std::abs(next - estimate) <= tolerance * next) {
      return next;
    }
    estimate = next;
  }
  fail(ErrorKind::NumericFailure, "operator_norm: power iteration did not converge");
}

double sup_norm(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

DiscrepancyReport discrepancy(const Matrix& c, const Matrix& c_hat) {
  return discrepancy(c, c_hat, std::sqrt(static_cast<double>(c.rows() * c.cols())),
                     "sqrt(nm)");
}

DiscrepancyReport discrepancy(const Matrix& c, const Matrix& c_hat, double divisor,
                              std::string label) {
  require(c.rows() == c_hat.rows() && c.cols() == c_hat.cols(), ErrorKind::InvalidInput,
          "discrepancy: shape mismatch");
  require(divisor > 0.0, ErrorKind::InvalidParameter, "discrepancy: divisor must be positive");
  const Matrix diff = c - c_hat;
  DiscrepancyReport report;
  report.sup_norm = sup_norm(diff);
  report.frobenius = diff.norm();
  report.frobenius_normalized = report.frobenius / divisor;
  report.operator_norm = diff.size() == 0 ? 0.0 : operator_norm(diff);
  report.normalization = std::move(label);
  return report;
}

RateFit fit_rate(std::vector<std::pair<double, double>> points) {
  require(points.size() >= 3, ErrorKind::InvalidInput, "fit_rate: need at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, value] : points) {
    require(n > 0.0 && value > 0.0 && std::isfinite(value), ErrorKind::InvalidInput,
            "fit_rate: scales and values must be positive and finite");
    sx += std::log(n);
    sy += std::log(value);
  }
  const double count = static_cast<double>(points.size());
  const double mx = sx / count;
  const double my = sy / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [n, value] : points) {
    const double dx = std::log(n) - mx;
    const double dy = std::log(value) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, ErrorKind::InvalidInput, "fit_rate: all scales are equal");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // A constant series is fit exactly by a flat line.
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.points = std::move(points);
  return fit;
}

}  // namespace latent_ot
