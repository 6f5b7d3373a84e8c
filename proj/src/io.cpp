#include "latent_ot/io.hpp"

#include "latent_ot/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace latent_ot::io {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void write_edge_list(const Graph& graph, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  const auto edges = graph.edges();
  out << graph.node_count << ' ' << edges.size() << '\n';
  for (const auto& [i, j] : edges) out << i << ' ' << j << '\n';
  finish(out, path);
}

Graph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open " + path.string());
  long long nodes = -1, count = -1;
  in >> nodes >> count;
  require(in.good() && nodes >= 0 && count >= 0, ErrorKind::InvalidInput,
          path.string() + ": malformed edge-list header");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) {
    int i = -1, j = -1;
    in >> i >> j;
    require(!in.fail(), ErrorKind::InvalidInput,
            path.string() + ": expected " + std::to_string(count) + " edges, read " + std::to_string(k));
    edges.emplace_back(i, j);
  }
  return Graph::from_edges(static_cast<int>(nodes), edges);
}

void write_latents_csv(const LatentConfiguration& latents, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "index,role";
  for (Eigen::Index k = 0; k < latents.points.cols(); ++k) out << ",coord" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < latents.node_count(); ++i) {
    out << i << ',' << latents.role(i);
    for (Eigen::Index k = 0; k < latents.points.cols(); ++k) out << ',' << number(latents.points(i, k));
    out << '\n';
  }
  finish(out, path);
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << number(m(i, j));
    }
    out << '\n';
  }
  finish(out, path);
}

}  // namespace latent_ot::io
