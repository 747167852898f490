#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace calabi {

using Face = std::array<int, 3>;

// Unordered vertex pair, stored with a < b.
struct Edge {
  int a;
  int b;
  bool operator==(const Edge&) const = default;
};

// Combinatorics of a closed triangulated surface. Immutable after build().
//
// Faces keep the vertex order they were given in; nothing here depends on a
// global orientation. Corner c of face f sits opposite edge face_edges(f)[c].
class TriangulatedSurface {
public:
  // Validates the face list and builds adjacency. The vertex count is taken as
  // max index + 1 unless given explicitly (a mesh file declares it).
  static TriangulatedSurface build(std::vector<Face> faces, std::optional<int> vertex_count = std::nullopt);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int face_count() const { return static_cast<int>(faces_.size()); }
  int euler_characteristic() const { return vertex_count() - edge_count() + face_count(); }

  std::span<const Face> faces() const { return faces_; }
  std::span<const Edge> edges() const { return edges_; }
  const Face& face(int f) const { return faces_[f]; }
  const Edge& edge(int e) const { return edges_[e]; }

  // Edge ids opposite corners 0, 1, 2 of face f.
  const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }
  // The two faces flanking edge e.
  const std::array<int, 2>& edge_faces(int e) const { return edge_faces_[e]; }

  std::optional<int> edge_index(int a, int b) const;
  bool is_face(int a, int b, int c) const;

  std::span<const int> neighbors(int v) const { return neighbors_[v]; }
  // Faces incident to v.
  std::span<const int> vertex_faces(int v) const { return vertex_faces_[v]; }
  int degree(int v) const { return static_cast<int>(neighbors_[v].size()); }
  int max_degree() const;

  // Position of v inside face f, or -1.
  int corner_of(int f, int v) const;

private:
  TriangulatedSurface() = default;

  static long long key(int a, int b) { return a < b ? (static_cast<long long>(a) << 32) | b : (static_cast<long long>(b) << 32) | a; }

  int vertex_count_ = 0;
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<std::array<int, 2>> edge_faces_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> vertex_faces_;
  std::unordered_map<long long, int> edge_lookup_;
};

// Edge weights Φ in [0, π/2] radians, indexed by edge id.
class WeightAssignment {
public:
  WeightAssignment() = default;
  // Φ ≡ 0 on every edge.
  explicit WeightAssignment(const TriangulatedSurface& surface);
  WeightAssignment(const TriangulatedSurface& surface, std::vector<double> phi);

  void set(const TriangulatedSurface& surface, int a, int b, double phi);
  double operator[](int edge) const { return phi_[edge]; }
  std::span<const double> values() const { return phi_; }
  int size() const { return static_cast<int>(phi_.size()); }
  bool all_zero() const;

private:
  static void check_range(double phi);
  std::vector<double> phi_;
};

struct TriangleCycle {
  std::array<int, 3> vertices;
  double weight_sum;
};

struct QuadCycle {
  std::array<int, 4> vertices; // in cycle order
  double weight_sum;
};

// Short cycles of the 1-skeleton that violate the two combinatorial
// conditions for existence of a zero-curvature packing. Null-homotopy is not
// decided: every short cycle is treated as potentially contractible, so on
// χ < 0 surfaces a flagged cycle may be essential.
struct ObstructionReport {
  std::vector<TriangleCycle> triangle_violations; // non-facial, ΣΦ ≥ π
  std::vector<QuadCycle> quad_violations;         // not two adjacent faces, ΣΦ ≥ 2π
  bool conservative = true;

  bool pass() const { return triangle_violations.empty() && quad_violations.empty(); }
  std::string label() const;
};

ObstructionReport check_thurston_conditions(const TriangulatedSurface& surface, const WeightAssignment& weights);

} // namespace calabi
