#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latent_ot/error.hpp"
#include "latent_ot/harness.hpp"
#include "latent_ot/io.hpp"
#include "latent_ot/properties.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace latent_ot;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::NumericFailure;
}

ResultRow row(std::string estimator, int N, std::uint64_t seed, std::string metric, double value) {
  return {"usvt_nonlocal", seed, N, N / 3, N - N / 3, 0.1, std::move(estimator), std::move(metric),
          value};
}

// Balanced-tag check that ignores the XML declaration and self-closing tags.
bool well_formed(const std::string& svg) {
  std::vector<std::string> stack;
  const std::regex tag(R"(<(/?)([A-Za-z][\w:-]*)[^>]*?(/?)>)");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tag); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    if (m[3] == "/") continue;
    if (m[1] == "/") {
      if (stack.empty() || stack.back() != m[2]) return false;
      stack.pop_back();
    } else {
      stack.push_back(m[2]);
    }
  }
  return stack.empty() && svg.rfind("<?xml", 0) == 0;
}

std::vector<std::vector<std::pair<double, double>>> polylines(const std::string& svg) {
  std::vector<std::vector<std::pair<double, double>>> out;
  const std::regex line(R"re(<polyline[^>]*points="([^"]*)")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), line); it != std::sregex_iterator();
       ++it) {
    std::vector<std::pair<double, double>> pts;
    std::istringstream ss((*it)[1].str());
    double x, y;
    char comma;
    while (ss >> x >> comma >> y) pts.emplace_back(x, y);
    out.push_back(pts);
  }
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "latent_ot_test_harness";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const char* kLocalConfig = R"({
  "experiment": "local_geodesic",
  "grid": [300],
  "seeds": [42],
  "epsilon": 0.1,
  "epsilon_units": "diameter",
  "workers": 2
})";

}  // namespace

TEST_CASE("config parsing and validation") {
  const auto cfg = parse_config(kLocalConfig);
  CHECK(cfg.experiment == ExperimentKind::LocalGeodesic);
  CHECK(cfg.manifold.kind == ManifoldSpec::Kind::Sphere);
  CHECK(cfg.targets_n(300) == 20);
  CHECK(cfg.resolved_epsilon() == doctest::Approx(0.1 * cfg.manifold.diameter()));

  const auto nonlocal = parse_config(R"({"experiment": "usvt_nonlocal", "grid": [200, 400],
                                         "seeds": [0], "rho": 0.5})");
  CHECK(nonlocal.manifold.kind == ManifoldSpec::Kind::UnitSquare);
  CHECK(nonlocal.targets_n(400) == 133);
  CHECK(nonlocal.targets_m(400) == 267);
  CHECK(nonlocal.rho.at(400) == 0.5);

  const auto fast = parse_config(R"({"experiment": "fast_nonlocal", "grid": [200], "seeds": [0],
                                     "kernel": {"kind": "gaussian", "p": 1, "sigma": 0.3}})");
  CHECK(fast.resolved_epsilon() == 0.3);
}

TEST_CASE("config rejections") {
  // Malformed documents are invalid input; well-formed but inconsistent ones
  // are invalid parameters.
  const auto rejected = [](const char* text) {
    return kind_of([&] { parse_config(text); });
  };
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [300], "seeds": [1], "bogus": 1})") ==
        ErrorKind::InvalidInput);
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [300], "seeds": [1],
                     "manifold": {"kind": "sphere", "radious": 2}})") == ErrorKind::InvalidInput);
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [300], "seeds": []})") ==
        ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [], "seeds": [1]})") ==
        ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [300, 200], "seeds": [1]})") ==
        ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [300], "seeds": [1, 1]})") ==
        ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [300], "seeds": [1],
                     "epsilon": 0})") == ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [30], "seeds": [1]})") ==
        ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "local_geodesic", "grid": [300], "seeds": [1],
                     "h": 0.1, "h_schedule": {"c0": 1}})") == ErrorKind::InvalidInput);
  CHECK(rejected(R"({"experiment": "gamma_sweep", "grid": [300], "seeds": [1]})") ==
        ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "usvt_nonlocal", "grid": [300], "seeds": [1], "rho": 0})") ==
        ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "usvt_nonlocal", "grid": [300], "seeds": [1],
                     "n": 10, "m": 10})") == ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "fast_nonlocal", "grid": [300], "seeds": [1],
                     "epsilon": 0.2})") == ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "fast_nonlocal", "grid": [300], "seeds": [1],
                     "kernel": {"kind": "constant", "value": 0.5}})") == ErrorKind::InvalidParameter);
  CHECK(rejected(R"({"experiment": "teleport", "grid": [300], "seeds": [1]})") ==
        ErrorKind::InvalidInput);
  CHECK(rejected("not json") == ErrorKind::InvalidInput);
  CHECK(kind_of([] { load_config("/nonexistent/config.json"); }) == ErrorKind::Io);

  const auto stability = parse_config(R"({"experiment": "stability_suite", "grid": [3],
                                          "seeds": [1], "epsilon": 0})");
  CHECK(stability.resolved_epsilon() == 0.0);
}

TEST_CASE("trial seeds") {
  CHECK(trial_seed(0, 300).value == trial_seed(0, 300).value);
  CHECK(trial_seed(0, 300).value != trial_seed(1, 300).value);
  CHECK(trial_seed(0, 300).value != trial_seed(0, 1000).value);
}

TEST_CASE("csv formatting") {
  ResultTable empty;
  CHECK(format_csv(empty) == "experiment,seed,N,n,m,eps,estimator,metric,value\n");
  CHECK(parse_csv(format_csv(empty)) == empty);

  ResultTable one;
  one.add(row("usvt", 200, 3, "ot_error", 0.125));
  CHECK(format_csv(one) ==
        "experiment,seed,N,n,m,eps,estimator,metric,value\n"
        "usvt_nonlocal,3,200,66,134,0.1,usvt,ot_error,0.125\n");

  ResultTable t;
  t.add(row("usvt", 400, 1, "ot_error", 1.0 / 3.0));
  t.add(row("usvt", 200, 2, "ot_error", 2.0 / 3.0));
  t.add(row("usvt", 200, 1, "ot_error", std::numeric_limits<double>::infinity()));
  t.add(row("usvt", 200, 1, "kernel_sup", std::nan("")));
  t.add(row("usvt", 200, 1, "tiny", 1.234567890123456e-300));
  t.sort();
  CHECK(t.rows().front().N == 200);
  CHECK(t.rows().back().N == 400);
  const auto text = format_csv(t);
  CHECK(text.find(",inf\n") != std::string::npos);
  CHECK(text.find(",nan\n") != std::string::npos);
  const auto back = parse_csv(text);
  CHECK(format_csv(back) == text);
  REQUIRE(back.rows().size() == t.rows().size());
  for (std::size_t i = 0; i < t.rows().size(); ++i) {
    const auto& a = t.rows()[i];
    const auto& b = back.rows()[i];
    if (std::isnan(a.value)) {
      CHECK(std::isnan(b.value));
    } else {
      CHECK(a == b);
    }
  }

  const auto path = scratch("table.csv");
  emit_csv(t, path);
  CHECK(format_csv(read_csv(path)) == text);
}

TEST_CASE("csv rejections") {
  ResultTable dup;
  dup.add(row("usvt", 200, 1, "ot_error", 1));
  dup.add(row("usvt", 200, 1, "ot_error", 2));
  CHECK(kind_of([&] { dup.sort(); }) == ErrorKind::InvalidInput);

  ResultTable bad_label;
  CHECK(kind_of([&] { bad_label.add(row("us,vt", 200, 1, "ot_error", 1)); }) ==
        ErrorKind::InvalidInput);
  CHECK(kind_of([] { parse_csv("wrong,header\n"); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] {
          parse_csv("experiment,seed,N,n,m,eps,estimator,metric,value\nx,1,2,3\n");
        }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] {
          parse_csv("experiment,seed,N,n,m,eps,estimator,metric,value\nx,1,2,3,4,0.1,e,m,abc\n");
        }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { read_csv("/nonexistent/results.csv"); }) == ErrorKind::Io);
}

TEST_CASE("median by N") {
  ResultTable t;
  t.add(row("usvt", 200, 1, "e", 1));
  t.add(row("usvt", 200, 2, "e", 3));
  t.add(row("usvt", 200, 3, "e", 2));
  t.add(row("usvt", 400, 1, "e", 1));
  t.add(row("usvt", 400, 2, "e", std::nan("")));
  t.add(row("usvt", 400, 3, "e", 4));
  t.add(row("other", 400, 1, "e", 9));
  const auto med = median_by_n(t, "usvt", "e");
  REQUIRE(med.size() == 2);
  CHECK(med[0] == std::pair<double, double>{200, 2});
  CHECK(med[1] == std::pair<double, double>{400, 2.5});
}

TEST_CASE("local experiment is deterministic") {
  const auto cfg = parse_config(kLocalConfig);
  const auto first = run_experiment(cfg);
  const auto second = run_experiment(cfg);
  CHECK(format_csv(first.table) == format_csv(second.table));
  CHECK(first.table.has_metric("cost_sup"));
  CHECK(first.table.has_metric("ot_error"));
  CHECK(first.table.has_metric("plan_kl"));
  REQUIRE(first.timings.size() == 1);
  CHECK(first.timings[0].seconds >= 0.0);

  auto serial = cfg;
  serial.workers = 1;
  CHECK(format_csv(run_experiment(serial).table) == format_csv(first.table));

  for (const auto& r : first.table.rows()) {
    CHECK(r.experiment == "local_geodesic");
    CHECK(r.seed == 42);
    CHECK(r.N == 300);
    if (r.metric == "bounds_hold") CHECK(r.value == 1.0);
  }
}

TEST_CASE("stability experiment") {
  const auto cfg = parse_config(R"({"experiment": "stability_suite", "grid": [2, 4],
                                    "seeds": [1, 2, 3], "epsilon": 0.5})");
  const auto out = run_experiment(cfg);
  for (const auto& r : out.table.rows()) {
    if (r.metric == "bounds_hold") CHECK(r.value == 1.0);
    if (r.metric.rfind("slack_", 0) == 0) CHECK(r.value >= -1e-9);
  }
  CHECK(out.table.has_metric("value_gap"));
}

TEST_CASE("plot rendering") {
  ResultTable t;
  t.add(row("usvt", 200, 1, "e", 0.5));
  const auto single = render_plot(t, "e");
  CHECK(well_formed(single));
  const auto one = polylines(single);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 1);

  ResultTable two;
  for (int N : {200, 400, 800}) {
    for (std::uint64_t seed : {1, 2}) {
      two.add(row("usvt", N, seed, "e", 10.0 / N));
      two.add(row("fast", N, seed, "e", 1.0 / std::sqrt(N)));
    }
  }
  const auto svg = render_plot(two, "e");
  CHECK(well_formed(svg));
  const auto lines = polylines(svg);
  REQUIRE(lines.size() == 2);
  for (const auto& pts : lines) {
    REQUIRE(pts.size() == 3);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      CHECK(pts[i].first > pts[i - 1].first);
      CHECK(pts[i].second > pts[i - 1].second);  // values fall, pixel y grows downward
    }
  }
  CHECK(svg.find("data-estimator=\"fast\"") != std::string::npos);
  CHECK(svg.find("data-estimator=\"usvt\"") != std::string::npos);

  CHECK(kind_of([&] { render_plot(two, "missing"); }) == ErrorKind::InvalidInput);
  ResultTable zeros;
  zeros.add(row("usvt", 200, 1, "e", 0.0));
  CHECK(kind_of([&] { render_plot(zeros, "e"); }) == ErrorKind::InvalidInput);

  const auto path = scratch("plot.svg");
  emit_plot(two, "e", path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == svg);
}

TEST_CASE("edge list round trip") {
  const Graph g = Graph::from_edges(5, {{0, 1}, {1, 4}, {2, 3}});
  const auto path = scratch("graph.txt");
  io::write_edge_list(g, path);
  const Graph back = io::read_edge_list(path);
  CHECK(back.node_count == 5);
  CHECK(back.edges() == g.edges());

  const auto bad = scratch("bad_graph.txt");
  std::ofstream(bad) << "3 1\n0 7\n";
  CHECK(kind_of([&] { io::read_edge_list(bad); }) != ErrorKind::NumericFailure);
  CHECK(kind_of([] { io::read_edge_list("/nonexistent/graph.txt"); }) == ErrorKind::Io);
}

TEST_CASE("property suite") {
  PropertyOptions options;
  options.trials = 1;
  const auto a = run_property_suite(options);
  const auto b = run_property_suite(options);
  CHECK(a.passed());
  CHECK(a.format() == b.format());
  CHECK(a.outcomes.size() >= 10);

  options.trials = 20;
  options.bound_scale = 0.5;
  const auto control = run_property_suite(options);
  CHECK_FALSE(control.passed());
  CHECK(control.total_failures() > 0);
}
