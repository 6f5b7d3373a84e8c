#pragma once

#include "latent_ot/cost_estimators.hpp"
#include "latent_ot/diagnostics.hpp"
#include "latent_ot/latent_models.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace latent_ot {

enum class ExperimentKind { LocalGeodesic, UsvtNonlocal, FastNonlocal, GammaSweep, StabilitySuite };

std::string to_string(ExperimentKind kind);

/// Sparsity level of the non-local kernel as a function of N.
struct RhoSpec {
  enum class Kind { Constant, Sparse };

  Kind kind = Kind::Constant;
  double value = 1.0;  // rho itself, or c in c log N / N

  double at(int node_count) const;
};

/// Cost map choice; Default picks identity on [0, D_X] for the local
/// pipeline and 1 - w on [w_min, w_max] for USVT.
struct CostMapSpec {
  enum class Kind { Default, Identity, OneMinus, Table };

  Kind kind = Kind::Default;
  std::vector<std::pair<double, double>> breakpoints;
};

struct OutputSpec {
  std::string csv = "results.csv";
  std::string timing = "timing.csv";
  std::vector<std::string> plots;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::LocalGeodesic;
  std::vector<int> grid;
  std::vector<std::uint64_t> seeds;

  // Target counts. Unset means 20/20 for the local pipeline, and
  // n = N / 3, m = N - n for the non-local pipelines.
  std::optional<int> n;
  std::optional<int> m;

  double epsilon = 0.1;
  bool epsilon_given = false;
  bool epsilon_relative = false;  // epsilon is a multiple of the diameter

  ManifoldSpec manifold;
  DensitySpec density;
  TargetPlacement placement;

  std::optional<double> h;  // fixed radius instead of the schedule
  double h_c0 = 1.0;

  NonlocalKernel kernel;  // rho is filled per N from `rho`
  RhoSpec rho;
  double gamma = 1.0;
  std::vector<double> gammas;
  std::optional<double> eta;
  CostMapSpec cost_map;

  int workers = 0;  // 0 uses every available thread
  OutputSpec outputs;

  int targets_n(int node_count) const;
  int targets_m(int node_count) const;
  /// Regularization used by the experiment (sigma for the fast pipeline).
  double resolved_epsilon() const;
  CostMap resolved_cost_map() const;
  /// Throws InvalidParameter on any inconsistency.
  void validate() const;
};

/// Parses a JSON document. Unknown keys are rejected at every level.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  int N = 0;
  int n = 0;
  int m = 0;
  double eps = 0.0;
  std::string estimator;
  std::string metric;
  double value = 0.0;

  bool operator==(const ResultRow&) const = default;
};

class ResultTable {
 public:
  /// Values are rounded to the 12 significant digits used on disk, so a
  /// table equals its parsed serialization.
  void add(ResultRow row);
  void append(const std::vector<ResultRow>& rows);
  /// Orders rows by (experiment, N, seed, estimator, metric) and rejects
  /// duplicate keys.
  void sort();

  const std::vector<ResultRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  bool has_metric(std::string_view metric) const;
  std::vector<std::string> estimators(std::string_view metric) const;

  bool operator==(const ResultTable&) const = default;

 private:
  std::vector<ResultRow> rows_;
};

struct TrialTiming {
  std::string experiment;
  int N = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
};

struct ExperimentOutput {
  ResultTable table;
  std::vector<TrialTiming> timings;  // kept out of the CSV to keep it deterministic
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Seed for the (seed, N) cell; every random draw of a trial derives from it.
RngSeed trial_seed(std::uint64_t seed, int node_count);

/// Median over seeds of one estimator's metric, per N ascending.
std::vector<std::pair<double, double>> median_by_n(const ResultTable& table,
                                                   std::string_view estimator,
                                                   std::string_view metric);

std::string format_csv(const ResultTable& table);
ResultTable parse_csv(std::string_view text);
void emit_csv(const ResultTable& table, const std::filesystem::path& path);
ResultTable read_csv(const std::filesystem::path& path);
void emit_timing_csv(const std::vector<TrialTiming>& timings, const std::filesystem::path& path);

/// Log-log SVG of seed medians, one polyline per estimator.
std::string render_plot(const ResultTable& table, std::string_view metric);
void emit_plot(const ResultTable& table, std::string_view metric, const std::filesystem::path& path);

}  // namespace latent_ot
