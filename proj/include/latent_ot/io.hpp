#pragma once

#include "latent_ot/latent_models.hpp"

#include <filesystem>

namespace latent_ot::io {

/// Plain-text edge list: a "N E" header, then one "i j" line per edge with
/// i < j in lexicographic order.
void write_edge_list(const Graph& graph, const std::filesystem::path& path);
Graph read_edge_list(const std::filesystem::path& path);

/// index,role,coord0,... with role in {x, y, z}.
void write_latents_csv(const LatentConfiguration& latents, const std::filesystem::path& path);

/// Comma-separated rows, 12 significant digits.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);

}  // namespace latent_ot::io
