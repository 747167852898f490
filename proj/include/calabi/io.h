#pragma once

#include "calabi/flow.h"
#include "calabi/hyperbolic.h"
#include "calabi/mesh.h"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace calabi::io {

// Mesh file: optional '#' comment lines, then "N F", then F lines of three
// 0-based vertex indices.
TriangulatedSurface parse_mesh(std::istream& in, const std::string& source = "<stream>");
TriangulatedSurface read_mesh(const std::filesystem::path& path);

// Weight file: one "i j phi" line per edge (radians); edges not listed get 0.
WeightAssignment parse_weights(std::istream& in, const TriangulatedSurface& surface, const std::string& source = "<stream>");
WeightAssignment read_weights(const std::filesystem::path& path, const TriangulatedSurface& surface);

// Whitespace separated reals, '#' comments allowed. Used for radii and target curvature files.
Vector parse_vector(std::istream& in, const std::string& source = "<stream>");
Vector read_vector(const std::filesystem::path& path, int expected_size);

// Radii spec: "const:<x>", "rand:<seed>" (log-uniform in [0.1, 10]) or "file:<path>".
Vector radii_from_spec(const std::string& spec, int vertex_count);
Vector random_radii(int vertex_count, std::uint64_t seed, double lo = 0.1, double hi = 10.0);

inline constexpr const char* kTrajectorySchema = "calabi-pack/trajectory/v1";

// Columns: t,energy,max_abs_K,min_r,max_r,h_used,lambda1 (empty when not sampled).
void write_trajectory_csv(const FlowTrajectory& trajectory, std::ostream& out);
nlohmann::json trajectory_json(const FlowTrajectory& trajectory);

// Shortest round-trip decimal form.
std::string format_double(double x);

} // namespace calabi::io
