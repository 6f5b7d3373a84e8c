#include "latent_ot/error.hpp"
#include "latent_ot/ot_core.hpp"

#include <limits>
#include <vector>

namespace latent_ot {

// Shortest augmenting path Hungarian method, O(n^3). Rows and columns are
// 1-based internally; index 0 is the virtual root of each augmentation.
double exact_ot_assignment(const CostMatrix& cost) {
  const Eigen::Index n = cost.rows();
  require(n == cost.cols(), ErrorKind::InvalidParameter,
          "exact_ot_assignment: cost must be square");
  require(n > 0, ErrorKind::InvalidParameter, "exact_ot_assignment: empty cost");
  const auto& c = cost.entries;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Eigen::Index> match(n + 1, 0), way(n + 1, 0);
  for (Eigen::Index row = 1; row <= n; ++row) {
    match[0] = row;
    Eigen::Index col0 = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const Eigen::Index i0 = match[col0];
      double delta = kInf;
      Eigen::Index col1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = col0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          col1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const Eigen::Index col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  double total = 0.0;
  for (Eigen::Index j = 1; j <= n; ++j) total += c(match[j] - 1, j - 1);
  return total / static_cast<double>(n);
}

}  // namespace latent_ot
