#include "latent_ot/harness.hpp"

#include "latent_ot/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace latent_ot {

namespace {

constexpr double kWidth = 760, kHeight = 480;
constexpr double kLeft = 90, kRight = 190, kTop = 40, kBottom = 70;
constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

struct Axis {
  double lo, hi;  // log10 range

  static Axis covering(double min_value, double max_value) {
    double lo = std::log10(min_value), hi = std::log10(max_value);
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
    return {lo, hi};
  }

  double fraction(double v) const { return (std::log10(v) - lo) / (hi - lo); }
};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

}  // namespace

std::string render_plot(const ResultTable& table, std::string_view metric) {
  require(table.has_metric(metric), ErrorKind::InvalidInput,
          "plot: metric '" + std::string(metric) + "' not present in the table");

  std::vector<Series> series;
  double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY, y_max = -INFINITY;
  for (const auto& name : table.estimators(metric)) {
    Series s{name, {}};
    for (const auto& [x, y] : median_by_n(table, name, metric)) {
      if (!(x > 0 && y > 0 && std::isfinite(y))) continue;
      s.points.emplace_back(x, y);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
    if (!s.points.empty()) series.push_back(std::move(s));
  }
  require(!series.empty(), ErrorKind::InvalidInput,
          "plot: metric '" + std::string(metric) + "' has no positive finite medians");

  const Axis ax = Axis::covering(x_min, x_max);
  const Axis ay = Axis::covering(y_min, y_max);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + ax.fraction(x) * plot_w; };
  const auto py = [&](double y) { return kTop + plot_h - ay.fraction(y) * plot_h; };

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kWidth) +
         "\" height=\"" + fmt("%.0f", kHeight) + "\" viewBox=\"0 0 " + fmt("%.0f", kWidth) + " " +
         fmt("%.0f", kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<g id=\"axes\" stroke=\"black\" fill=\"none\">\n";
  svg += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" +
         fmt("%.2f", plot_w) + "\" height=\"" + fmt("%.2f", plot_h) + "\"/>\n";
  svg += "</g>\n<g id=\"ticks\" fill=\"black\">\n";

  std::vector<double> x_ticks;
  for (const auto& s : series)
    for (const auto& p : s.points) x_ticks.push_back(p.first);
  std::sort(x_ticks.begin(), x_ticks.end());
  x_ticks.erase(std::unique(x_ticks.begin(), x_ticks.end()), x_ticks.end());
  for (double x : x_ticks) {
    svg += "<text x=\"" + fmt("%.2f", px(x)) + "\" y=\"" + fmt("%.2f", kTop + plot_h + 18) +
           "\" text-anchor=\"middle\">" + fmt("%g", x) + "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ay.lo)); e <= static_cast<int>(std::floor(ay.hi)); ++e) {
    const double y = std::pow(10.0, e);
    svg += "<text x=\"" + fmt("%.2f", kLeft - 8) + "\" y=\"" + fmt("%.2f", py(y) + 4) +
           "\" text-anchor=\"end\">" + fmt("%g", y) + "</text>\n";
  }
  svg += "</g>\n";
  svg += "<text x=\"" + fmt("%.2f", kLeft + plot_w / 2) + "\" y=\"" + fmt("%.2f", kHeight - 20) +
         "\" text-anchor=\"middle\">N (log scale)</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt("%.2f", kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " + fmt("%.2f", kTop + plot_h / 2) +
         ")\">median " + escape(metric) + " (log scale)</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::string color = kColors[k % kColors.size()];
    std::string points;
    for (const auto& [x, y] : s.points) {
      if (!points.empty()) points += ' ';
      points += fmt("%.2f", px(x)) + "," + fmt("%.2f", py(y));
    }
    svg += "<g class=\"series\" data-estimator=\"" + escape(s.name) + "\">\n";
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" +
           points + "\"/>\n";
    for (const auto& [x, y] : s.points) {
      svg += "<circle cx=\"" + fmt("%.2f", px(x)) + "\" cy=\"" + fmt("%.2f", py(y)) +
             "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
    }
    const double ly = kTop + 16 + 20 * static_cast<double>(k);
    svg += "<line x1=\"" + fmt("%.2f", kWidth - kRight + 16) + "\" y1=\"" + fmt("%.2f", ly - 4) +
           "\" x2=\"" + fmt("%.2f", kWidth - kRight + 40) + "\" y2=\"" + fmt("%.2f", ly - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", kWidth - kRight + 46) + "\" y=\"" + fmt("%.2f", ly) + "\">" +
           escape(s.name) + "</text>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const ResultTable& table, std::string_view metric, const std::filesystem::path& path) {
  const std::string svg = render_plot(table, metric);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << svg;
  out.flush();
  require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace latent_ot
