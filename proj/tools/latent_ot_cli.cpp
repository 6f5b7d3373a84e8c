#include "latent_ot/error.hpp"
#include "latent_ot/harness.hpp"
#include "latent_ot/io.hpp"
#include "latent_ot/properties.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace latent_ot;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitProperty = 3;

ExperimentConfig load_with_overrides(const std::string& path, int workers) {
  ExperimentConfig cfg = load_config(path);
  if (const char* env = std::getenv("LATENT_OT_SEED")) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    require(*env != '\0' && *end == '\0', ErrorKind::InvalidInput,
            std::string("LATENT_OT_SEED is not an unsigned integer: ") + env);
    cfg.seeds = {seed};
  }
  if (workers > 0) cfg.workers = workers;
  cfg.validate();
  return cfg;
}

std::vector<std::string> default_plots(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::LocalGeodesic: return {"cost_sup", "ot_error", "plan_kl"};
    case ExperimentKind::UsvtNonlocal: return {"kernel_frobenius_per_node", "ot_error"};
    case ExperimentKind::FastNonlocal: return {"ot_error", "kernel_block_frobenius"};
    case ExperimentKind::GammaSweep: return {"kernel_frobenius_per_node", "ot_error"};
    case ExperimentKind::StabilitySuite: return {};
  }
  return {};
}

void print_rates(const ResultTable& table, const std::vector<std::string>& metrics) {
  for (const auto& metric : metrics) {
    for (const auto& est : table.estimators(metric)) {
      const auto medians = median_by_n(table, est, metric);
      std::vector<std::pair<double, double>> positive;
      for (const auto& p : medians) {
        if (p.second > 0 && std::isfinite(p.second)) positive.push_back(p);
      }
      if (positive.size() < 3) continue;
      const RateFit fit = fit_rate(positive);
      std::printf("%-16s %-28s slope %+.4f  r2 %.4f\n", est.c_str(), metric.c_str(), fit.slope,
                  fit.r_squared);
    }
  }
}

int run_command(const std::string& config, const std::string& out_dir, int workers) {
  const ExperimentConfig cfg = load_with_overrides(config, workers);
  fs::create_directories(out_dir);
  const ExperimentOutput out = run_experiment(cfg);
  emit_csv(out.table, fs::path(out_dir) / cfg.outputs.csv);
  emit_timing_csv(out.timings, fs::path(out_dir) / cfg.outputs.timing);
  const auto plots = cfg.outputs.plots.empty() ? default_plots(cfg) : cfg.outputs.plots;
  for (const auto& metric : plots) {
    if (!out.table.has_metric(metric)) continue;
    emit_plot(out.table, metric, fs::path(out_dir) / (metric + ".svg"));
  }
  std::printf("%s: %zu rows -> %s\n", to_string(cfg.experiment).c_str(), out.table.rows().size(),
              (fs::path(out_dir) / cfg.outputs.csv).string().c_str());
  print_rates(out.table, plots);
  return 0;
}

int gen_command(const std::string& config, const std::string& out, const std::string& latents_out) {
  const ExperimentConfig cfg = load_with_overrides(config, 0);
  require(cfg.experiment != ExperimentKind::StabilitySuite, ErrorKind::InvalidParameter,
          "gen: stability_suite has no graph");
  const int nodes = cfg.grid.front();
  const std::uint64_t seed = cfg.seeds.front();
  const RngSeed trial = trial_seed(seed, nodes);
  const auto latents = sample_latents(cfg.manifold, cfg.density, cfg.targets_n(nodes),
                                      cfg.targets_m(nodes), nodes, trial, cfg.placement);
  Graph graph;
  if (cfg.experiment == ExperimentKind::LocalGeodesic) {
    graph = eps_graph(latents, cfg.h ? *cfg.h : h_schedule(nodes, cfg.manifold.intrinsic_dim(), cfg.h_c0));
  } else {
    NonlocalKernel kernel = cfg.kernel;
    kernel.rho = cfg.rho.at(nodes);
    graph = sample_kernel_graph(latents, kernel, trial);
  }
  io::write_edge_list(graph, out);
  if (!latents_out.empty()) io::write_latents_csv(latents, latents_out);
  std::printf("N=%d seed=%llu edges=%zu -> %s\n", nodes, static_cast<unsigned long long>(seed),
              graph.edge_count(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropic optimal transport on latent space random graphs"};
  app.require_subcommand(1);

  std::string config, out_dir, csv, metric, out, latents_out;
  int workers = 0, trials = 100;
  std::uint64_t seed = 1;
  double bound_scale = 1.0;

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV results and plots");
  run->add_option("--config", config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Output directory")->required();
  run->add_option("--workers", workers, "Concurrent trials (0 = all threads)")->check(CLI::NonNegativeNumber);

  auto* props = app.add_subcommand("props", "Run the randomized property suite");
  props->add_option("--trials", trials, "Instances per property")->check(CLI::PositiveNumber);
  props->add_option("--seed", seed, "Suite seed");
  props->add_option("--bound-scale", bound_scale, "Multiplier on bound right-hand sides")
      ->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "Render a log-log SVG of seed medians");
  plot->add_option("--csv", csv, "Result CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--metric", metric, "Metric name")->required();
  plot->add_option("--out", out, "Output SVG")->required();

  auto* gen = app.add_subcommand("gen", "Write the graph of the first (N, seed) cell");
  gen->add_option("--config", config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Edge list path")->required();
  gen->add_option("--latents", latents_out, "Optional latent positions CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(config, out_dir, workers);
    if (*gen) return gen_command(config, out, latents_out);
    if (*plot) {
      emit_plot(read_csv(csv), metric, out);
      return 0;
    }
    if (*props) {
      const PropertyReport report = run_property_suite({seed, trials, bound_scale});
      std::fputs(report.format().c_str(), stdout);
      return report.passed() ? 0 : kExitProperty;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "latent-ot: %s: %s\n", to_string(e.kind()), e.what());
    const bool numeric = e.kind() == ErrorKind::NumericFailure || e.kind() == ErrorKind::UnboundedDual;
    return numeric ? kExitNumeric : kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "latent-ot: %s\n", e.what());
    return kExitConfig;
  }
  return 0;
}
