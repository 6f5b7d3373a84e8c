#include "latent_ot/harness.hpp"

#include "latent_ot/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace latent_ot {

namespace {

using nlohmann::json;

// Tracks which keys of an object were consumed so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    require(j.is_object(), ErrorKind::InvalidInput, where_ + " must be a JSON object");
  }

  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    used_.insert(key);
    return true;
  }

  const json& at(const std::string& key) {
    require(has(key), ErrorKind::InvalidInput, where_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    return has(key) ? j_.at(key).get<T>() : fallback;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      require(used_.contains(key), ErrorKind::InvalidInput,
              where_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

ExperimentKind parse_kind(const std::string& s) {
  if (s == "local_geodesic") return ExperimentKind::LocalGeodesic;
  if (s == "usvt_nonlocal") return ExperimentKind::UsvtNonlocal;
  if (s == "fast_nonlocal") return ExperimentKind::FastNonlocal;
  if (s == "gamma_sweep") return ExperimentKind::GammaSweep;
  if (s == "stability_suite") return ExperimentKind::StabilitySuite;
  fail(ErrorKind::InvalidInput, "config: unknown experiment '" + s + "'");
}

Point parse_point(const json& j, const std::string& where) {
  require(j.is_array(), ErrorKind::InvalidInput, where + " must be an array of numbers");
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

ManifoldSpec parse_manifold(const json& j) {
  ObjectReader r(j, "manifold");
  const auto kind = r.get<std::string>("kind", "sphere");
  const double radius = r.get<double>("radius", 1.0);
  r.finish();
  if (kind == "sphere") return ManifoldSpec::sphere(radius);
  if (kind == "circle") return ManifoldSpec::circle(radius);
  if (kind == "unit_square") {
    require(radius == 1.0, ErrorKind::InvalidInput, "manifold: unit_square takes no radius");
    return ManifoldSpec::unit_square();
  }
  fail(ErrorKind::InvalidInput, "manifold: unknown kind '" + kind + "'");
}

DensitySpec parse_density(const json& j) {
  ObjectReader r(j, "density");
  const auto kind = r.get<std::string>("kind", "uniform");
  if (kind == "uniform") {
    r.finish();
    return DensitySpec::uniform();
  }
  require(kind == "tilted", ErrorKind::InvalidInput, "density: unknown kind '" + kind + "'");
  Point direction = parse_point(r.at("direction"), "density.direction");
  const double strength = r.at("strength").get<double>();
  r.finish();
  return DensitySpec::tilted(std::move(direction), strength);
}

TargetPlacement parse_placement(const json& j) {
  ObjectReader r(j, "placement");
  const auto kind = r.get<std::string>("kind", "iid");
  TargetPlacement placement;
  if (kind == "two_region") {
    placement.kind = TargetPlacement::Kind::TwoRegion;
    placement.center_x = parse_point(r.at("center_x"), "placement.center_x");
    placement.center_y = parse_point(r.at("center_y"), "placement.center_y");
    placement.radius = r.at("radius").get<double>();
  } else {
    require(kind == "iid", ErrorKind::InvalidInput, "placement: unknown kind '" + kind + "'");
  }
  r.finish();
  return placement;
}

NonlocalKernel parse_kernel(const json& j) {
  ObjectReader r(j, "kernel");
  const auto kind = r.get<std::string>("kind", "gaussian");
  NonlocalKernel kernel;
  if (kind == "gaussian") {
    kernel = NonlocalKernel::gaussian(r.get<double>("p", 2.0), r.get<double>("sigma", 0.5), 1.0);
  } else {
    require(kind == "constant", ErrorKind::InvalidInput, "kernel: unknown kind '" + kind + "'");
    kernel = NonlocalKernel::constant(r.at("value").get<double>(), 1.0);
  }
  r.finish();
  return kernel;
}

RhoSpec parse_rho(const json& j) {
  if (j.is_number()) return {RhoSpec::Kind::Constant, j.get<double>()};
  ObjectReader r(j, "rho");
  const auto kind = r.get<std::string>("kind", "constant");
  RhoSpec rho;
  if (kind == "sparse") {
    rho = {RhoSpec::Kind::Sparse, r.at("c").get<double>()};
  } else {
    require(kind == "constant", ErrorKind::InvalidInput, "rho: unknown kind '" + kind + "'");
    rho = {RhoSpec::Kind::Constant, r.at("value").get<double>()};
  }
  r.finish();
  return rho;
}

CostMapSpec parse_cost_map(const json& j) {
  ObjectReader r(j, "cost_map");
  const auto kind = r.at("kind").get<std::string>();
  CostMapSpec spec;
  if (kind == "identity") {
    spec.kind = CostMapSpec::Kind::Identity;
  } else if (kind == "one_minus") {
    spec.kind = CostMapSpec::Kind::OneMinus;
  } else if (kind == "table") {
    spec.kind = CostMapSpec::Kind::Table;
    spec.breakpoints = r.at("breakpoints").get<std::vector<std::pair<double, double>>>();
    CostMap::table(spec.breakpoints);
  } else {
    fail(ErrorKind::InvalidInput, "cost_map: unknown kind '" + kind + "'");
  }
  r.finish();
  return spec;
}

OutputSpec parse_outputs(const json& j) {
  ObjectReader r(j, "outputs");
  OutputSpec out;
  out.csv = r.get<std::string>("csv", out.csv);
  out.timing = r.get<std::string>("timing", out.timing);
  out.plots = r.get<std::vector<std::string>>("plots", {});
  r.finish();
  return out;
}

bool nonlocal(ExperimentKind kind) {
  return kind == ExperimentKind::UsvtNonlocal || kind == ExperimentKind::FastNonlocal ||
         kind == ExperimentKind::GammaSweep;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::LocalGeodesic: return "local_geodesic";
    case ExperimentKind::UsvtNonlocal: return "usvt_nonlocal";
    case ExperimentKind::FastNonlocal: return "fast_nonlocal";
    case ExperimentKind::GammaSweep: return "gamma_sweep";
    case ExperimentKind::StabilitySuite: return "stability_suite";
  }
  return "unknown";
}

double RhoSpec::at(int node_count) const {
  return kind == Kind::Constant ? value : sparse_rho(node_count, value);
}

int ExperimentConfig::targets_n(int node_count) const {
  if (n) return *n;
  if (experiment == ExperimentKind::LocalGeodesic) return 20;
  if (experiment == ExperimentKind::StabilitySuite) return node_count;
  return node_count / 3;
}

int ExperimentConfig::targets_m(int node_count) const {
  if (m) return *m;
  if (experiment == ExperimentKind::LocalGeodesic) return 20;
  if (experiment == ExperimentKind::StabilitySuite) return node_count;
  return node_count - targets_n(node_count);
}

double ExperimentConfig::resolved_epsilon() const {
  if (experiment == ExperimentKind::FastNonlocal) return kernel.sigma;
  return epsilon_relative ? epsilon * manifold.diameter() : epsilon;
}

CostMap ExperimentConfig::resolved_cost_map() const {
  switch (cost_map.kind) {
    case CostMapSpec::Kind::Identity: return CostMap::identity(manifold.diameter());
    case CostMapSpec::Kind::OneMinus: return CostMap::one_minus(kernel.w_min(), kernel.w_max());
    case CostMapSpec::Kind::Table: return CostMap::table(cost_map.breakpoints);
    case CostMapSpec::Kind::Default: break;
  }
  if (experiment == ExperimentKind::LocalGeodesic) return CostMap::identity(manifold.diameter());
  return CostMap::one_minus(kernel.w_min(), kernel.w_max());
}

void ExperimentConfig::validate() const {
  const auto bad = [](bool cond, const std::string& msg) {
    require(cond, ErrorKind::InvalidParameter, "config: " + msg);
  };
  bad(!grid.empty(), "grid must be nonempty");
  bad(std::is_sorted(grid.begin(), grid.end()) &&
          std::adjacent_find(grid.begin(), grid.end()) == grid.end(),
      "grid must be strictly ascending");
  bad(grid.front() >= 1, "grid values must be positive");
  bad(!seeds.empty(), "seeds must be nonempty");
  bad(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(),
      "seeds must be distinct");
  bad(workers >= 0, "workers must be nonnegative");

  const double eps = resolved_epsilon();
  if (experiment == ExperimentKind::StabilitySuite) {
    bad(eps >= 0.0, "epsilon must be nonnegative");
  } else {
    bad(eps > 0.0, "epsilon must be positive");
  }
  for (int size : grid) {
    const int nn = targets_n(size), mm = targets_m(size);
    bad(nn >= 1 && mm >= 1, "n and m must be positive");
    if (experiment != ExperimentKind::StabilitySuite) {
      bad(nn + mm <= size, "n + m exceeds N = " + std::to_string(size));
    }
  }
  if (experiment == ExperimentKind::StabilitySuite && eps == 0.0) {
    for (int size : grid) bad(targets_n(size) == targets_m(size), "epsilon = 0 needs n = m");
  }

  if (experiment == ExperimentKind::LocalGeodesic) {
    bad(!h || *h > 0.0, "h must be positive");
    bad(h_c0 > 0.0, "h_schedule.c0 must be positive");
  }
  if (nonlocal(experiment)) {
    for (int size : grid) {
      NonlocalKernel k = kernel;
      k.rho = rho.at(size);
      k.validate();
      bad(k.rho > 0.0, "rho must be positive");
    }
    bad(gamma > 0.0, "gamma must be positive");
    if (experiment != ExperimentKind::FastNonlocal) {
      for (int size : grid) {
        bad(targets_n(size) + targets_m(size) == size, "USVT pipelines need n + m = N");
      }
    }
  }
  if (experiment == ExperimentKind::GammaSweep) {
    bad(!gammas.empty(), "gamma_sweep needs a nonempty gammas list");
    for (double g : gammas) bad(g > 0.0, "gammas must be positive");
  }
  if (experiment == ExperimentKind::FastNonlocal) {
    bad(kernel.form == NonlocalKernel::Form::GaussianPower,
        "fast_nonlocal needs the gaussian kernel");
    bad(!epsilon_given || std::abs(epsilon - kernel.sigma) <= 1e-15 * kernel.sigma,
        "fast_nonlocal runs at epsilon = sigma");
    bad(!eta || *eta >= 1.0, "eta must be at least 1");
  }
  if (experiment != ExperimentKind::StabilitySuite) resolved_cost_map();
}

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("config: malformed JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    ObjectReader r(doc, "config");
    cfg.experiment = parse_kind(r.at("experiment").get<std::string>());
    cfg.grid = r.at("grid").get<std::vector<int>>();
    cfg.seeds = r.at("seeds").get<std::vector<std::uint64_t>>();
    if (r.has("n")) cfg.n = r.at("n").get<int>();
    if (r.has("m")) cfg.m = r.at("m").get<int>();
    if (r.has("epsilon")) {
      cfg.epsilon = r.at("epsilon").get<double>();
      cfg.epsilon_given = true;
    }
    const auto units = r.get<std::string>("epsilon_units", "absolute");
    require(units == "absolute" || units == "diameter", ErrorKind::InvalidInput,
            "config: epsilon_units must be 'absolute' or 'diameter'");
    cfg.epsilon_relative = units == "diameter";

    cfg.manifold = cfg.experiment == ExperimentKind::LocalGeodesic ? ManifoldSpec::sphere()
                                                                   : ManifoldSpec::unit_square();
    if (r.has("manifold")) cfg.manifold = parse_manifold(r.at("manifold"));
    if (r.has("density")) cfg.density = parse_density(r.at("density"));
    if (r.has("placement")) cfg.placement = parse_placement(r.at("placement"));
    if (r.has("h")) cfg.h = r.at("h").get<double>();
    if (r.has("h_schedule")) {
      ObjectReader hs(r.at("h_schedule"), "h_schedule");
      cfg.h_c0 = hs.get<double>("c0", 1.0);
      hs.finish();
    }
    require(!(r.has("h") && r.has("h_schedule")), ErrorKind::InvalidInput,
            "config: give either h or h_schedule, not both");
    cfg.kernel = NonlocalKernel::gaussian(2.0, 0.5, 1.0);
    if (r.has("kernel")) cfg.kernel = parse_kernel(r.at("kernel"));
    if (r.has("rho")) cfg.rho = parse_rho(r.at("rho"));
    cfg.gamma = r.get<double>("gamma", 1.0);
    cfg.gammas = r.get<std::vector<double>>("gammas", {});
    if (r.has("eta")) cfg.eta = r.at("eta").get<double>();
    if (r.has("cost_map")) cfg.cost_map = parse_cost_map(r.at("cost_map"));
    cfg.workers = r.get<int>("workers", 0);
    if (r.has("outputs")) cfg.outputs = parse_outputs(r.at("outputs"));
    r.finish();
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace latent_ot
