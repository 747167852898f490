#include "calabi/mesh.h"

#include "calabi/errors.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace calabi {

namespace {

std::string face_str(const Face& f) {
  return "{" + std::to_string(f[0]) + "," + std::to_string(f[1]) + "," + std::to_string(f[2]) + "}";
}

// Threshold comparison with a relative band, so that e.g. four edges of π/2
// count as reaching 2π.
bool reaches(double sum, double threshold) { return sum >= threshold * (1.0 - 1e-12); }

} // namespace

TriangulatedSurface TriangulatedSurface::build(std::vector<Face> faces, std::optional<int> vertex_count) {
  if (faces.empty()) throw InvalidSurface("surface has no faces");

  int max_index = -1;
  for (const Face& f : faces) {
    for (int v : f) {
      if (v < 0) throw InvalidSurface("negative vertex index in face " + face_str(f));
      max_index = std::max(max_index, v);
    }
  }
  const int n = vertex_count.value_or(max_index + 1);
  if (max_index >= n) throw InvalidSurface("vertex index " + std::to_string(max_index) + " out of range [0, " + std::to_string(n) + ")");

  TriangulatedSurface s;
  s.vertex_count_ = n;
  s.faces_ = std::move(faces);

  std::set<std::array<int, 3>> seen;
  for (const Face& f : s.faces_) {
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) throw DegenerateFace("repeated vertex in face " + face_str(f));
    std::array<int, 3> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    if (!seen.insert(sorted).second) throw InvalidSurface("duplicate face " + face_str(f));
  }

  // Edges and their incident faces.
  std::vector<std::vector<int>> incident;
  s.face_edges_.resize(s.faces_.size());
  for (int fi = 0; fi < s.face_count(); ++fi) {
    const Face& f = s.faces_[fi];
    for (int c = 0; c < 3; ++c) {
      const int a = f[(c + 1) % 3], b = f[(c + 2) % 3];
      auto [it, inserted] = s.edge_lookup_.try_emplace(key(a, b), s.edge_count());
      if (inserted) {
        s.edges_.push_back({std::min(a, b), std::max(a, b)});
        incident.emplace_back();
      }
      incident[it->second].push_back(fi);
      s.face_edges_[fi][c] = it->second;
    }
  }

  s.edge_faces_.resize(s.edges_.size());
  for (int e = 0; e < s.edge_count(); ++e) {
    const auto& inc = incident[e];
    const std::string name = "edge (" + std::to_string(s.edges_[e].a) + "," + std::to_string(s.edges_[e].b) + ")";
    if (inc.size() > 2) throw NonManifold(name + " belongs to " + std::to_string(inc.size()) + " faces");
    if (inc.size() < 2) throw BoundaryEdge(name + " belongs to a single face");
    s.edge_faces_[e] = {inc[0], inc[1]};
  }

  s.neighbors_.assign(n, {});
  s.vertex_faces_.assign(n, {});
  for (const Edge& e : s.edges_) {
    s.neighbors_[e.a].push_back(e.b);
    s.neighbors_[e.b].push_back(e.a);
  }
  for (int fi = 0; fi < s.face_count(); ++fi)
    for (int v : s.faces_[fi]) s.vertex_faces_[v].push_back(fi);
  for (auto& nb : s.neighbors_) std::sort(nb.begin(), nb.end());

  for (int v = 0; v < n; ++v) {
    if (s.degree(v) < 3) throw InvalidSurface("vertex " + std::to_string(v) + " has degree " + std::to_string(s.degree(v)));
    // On a closed surface the faces around v form a single cycle; with every
    // edge in two faces this reduces to #faces == #neighbors plus connectivity.
    const auto& vf = s.vertex_faces_[v];
    if (vf.size() != s.neighbors_[v].size()) throw NonManifold("vertex " + std::to_string(v) + " is not a manifold point");
    std::vector<bool> visited(vf.size(), false);
    std::vector<int> stack{0};
    visited[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const int cur = vf[stack.back()];
      stack.pop_back();
      for (std::size_t k = 0; k < vf.size(); ++k) {
        if (visited[k]) continue;
        int shared = 0;
        for (int a : s.faces_[cur])
          for (int b : s.faces_[vf[k]]) shared += (a == b);
        if (shared == 2) {
          visited[k] = true;
          ++reached;
          stack.push_back(static_cast<int>(k));
        }
      }
    }
    if (reached != vf.size()) throw NonManifold("faces around vertex " + std::to_string(v) + " form more than one fan");
  }
  return s;
}

std::optional<int> TriangulatedSurface::edge_index(int a, int b) const {
  auto it = edge_lookup_.find(key(a, b));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

bool TriangulatedSurface::is_face(int a, int b, int c) const {
  auto e = edge_index(a, b);
  if (!e) return false;
  for (int f : edge_faces_[*e])
    if (corner_of(f, c) >= 0) return true;
  return false;
}

int TriangulatedSurface::max_degree() const {
  int d = 0;
  for (int v = 0; v < vertex_count_; ++v) d = std::max(d, degree(v));
  return d;
}

int TriangulatedSurface::corner_of(int f, int v) const {
  const Face& face = faces_[f];
  for (int c = 0; c < 3; ++c)
    if (face[c] == v) return c;
  return -1;
}

WeightAssignment::WeightAssignment(const TriangulatedSurface& surface) : phi_(surface.edge_count(), 0.0) {}

WeightAssignment::WeightAssignment(const TriangulatedSurface& surface, std::vector<double> phi) : phi_(std::move(phi)) {
  if (static_cast<int>(phi_.size()) != surface.edge_count())
    throw DimensionMismatch("weight vector has " + std::to_string(phi_.size()) + " entries, surface has " +
                            std::to_string(surface.edge_count()) + " edges");
  for (double p : phi_) check_range(p);
}

void WeightAssignment::set(const TriangulatedSurface& surface, int a, int b, double phi) {
  auto e = surface.edge_index(a, b);
  if (!e) throw DomainError("(" + std::to_string(a) + "," + std::to_string(b) + ") is not an edge");
  check_range(phi);
  if (phi_.empty()) phi_.assign(surface.edge_count(), 0.0);
  phi_[*e] = phi;
}

bool WeightAssignment::all_zero() const {
  return std::all_of(phi_.begin(), phi_.end(), [](double p) { return p == 0.0; });
}

void WeightAssignment::check_range(double phi) {
  if (!(phi >= 0.0 && phi <= std::numbers::pi / 2))
    throw DomainError("weight " + std::to_string(phi) + " outside [0, pi/2]");
}

std::string ObstructionReport::label() const {
  std::string s = pass() ? "PASS" : "FAIL";
  s += " (conservative: flagged cycles may be essential on surfaces with chi < 0)";
  return s;
}

ObstructionReport check_thurston_conditions(const TriangulatedSurface& surface, const WeightAssignment& weights) {
  using std::numbers::pi;
  if (weights.size() != surface.edge_count()) throw DimensionMismatch("weights do not match surface");

  auto phi = [&](int a, int b) { return weights[*surface.edge_index(a, b)]; };
  auto adjacent = [&](int a, int b) { return surface.edge_index(a, b).has_value(); };

  ObstructionReport report;
  const int n = surface.vertex_count();

  // 3-cycles a < b < c.
  for (int a = 0; a < n; ++a) {
    for (int b : surface.neighbors(a)) {
      if (b <= a) continue;
      for (int c : surface.neighbors(b)) {
        if (c <= b || !adjacent(a, c)) continue;
        if (surface.is_face(a, b, c)) continue;
        const double sum = phi(a, b) + phi(b, c) + phi(a, c);
        if (reaches(sum, pi)) report.triangle_violations.push_back({{a, b, c}, sum});
      }
    }
  }

  // 4-cycles a-b-c-d with a the smallest vertex and b < d.
  for (int a = 0; a < n; ++a) {
    for (int b : surface.neighbors(a)) {
      if (b <= a) continue;
      for (int c : surface.neighbors(b)) {
        if (c <= a || c == b) continue;
        for (int d : surface.neighbors(c)) {
          if (d <= b || d == c || !adjacent(d, a)) continue;
          // Boundary of two faces glued along a diagonal?
          const bool two_faces = (adjacent(a, c) && surface.is_face(a, b, c) && surface.is_face(a, c, d)) ||
                                 (adjacent(b, d) && surface.is_face(a, b, d) && surface.is_face(b, c, d));
          if (two_faces) continue;
          const double sum = phi(a, b) + phi(b, c) + phi(c, d) + phi(d, a);
          if (reaches(sum, 2 * pi)) report.quad_violations.push_back({{a, b, c, d}, sum});
        }
      }
    }
  }
  return report;
}

} // namespace calabi
