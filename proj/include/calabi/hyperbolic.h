#pragma once

#include "calabi/mesh.h"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace calabi {

using Vector = Eigen::VectorXd;

// Scalar kernels of the hyperbolic cosine law. Pure functions.
namespace hyperbolic {

// ln sinh x and ln cosh x without overflow for large x.
double log_sinh(double x);
double log_cosh(double x);

// u = ln tanh(r/2) and its inverse r = 2 artanh(e^u).
double u_from_r(double r);
double r_from_u(double u);

// Length of the edge between circles of radii ri, rj meeting at angle phi:
// cosh l = cosh ri cosh rj + sinh ri sinh rj cos phi.
double edge_length(double ri, double rj, double phi);

// Inner angles of the hyperbolic triangle with side lengths (a, b, c);
// angle k is opposite side k.
std::array<double, 3> face_angles(double a, double b, double c);

// δ = ri + rj - edge_length(ri, rj, phi) >= 0, evaluated without subtracting.
double edge_defect(double ri, double rj, double phi);

// The triangle of a face in a packing: corner radii r, weight phi[c] on the
// edge opposite corner c. The excesses s - l_c come from the radii and the
// edge defects rather than from differences of lengths, so thin triangles
// (one radius far below the others) keep full relative accuracy.
struct PackedTriangle {
  std::array<double, 3> lengths{};
  std::array<double, 3> excess{};
  double semiperimeter = 0;
  std::array<double, 3> angles{};
};
PackedTriangle packed_triangle(const std::array<double, 3>& r, const std::array<double, 3>& phi);

// Derivatives of the three inner angles of one face with respect to the
// u-coordinates of its corners: d[a][b] = ∂θ_a/∂u_b = ∂θ_a/∂r_b · sinh r_b,
// plus area_u[b] = ∂Area/∂u_b.
struct FaceDerivatives {
  std::array<std::array<double, 3>, 3> d{};
  std::array<double, 3> area_u{};
};

// `r` holds the corner radii, `phi` the weight of the edge opposite each corner.
FaceDerivatives face_derivatives(const std::array<double, 3>& r, const std::array<double, 3>& phi);
// Closed forms valid for phi ≡ 0, evaluated in log-space.
FaceDerivatives zero_weight_derivatives(const std::array<double, 3>& r);
// Chain rule through edge_length and the cosine law, term by term; any phi.
// Loses digits on thin triangles, kept as a cross-check.
FaceDerivatives chain_rule_derivatives(const std::array<double, 3>& r, const std::array<double, 3>& phi);
// The same derivatives reduced to sums of non-negative terms, in log-space.
// Used for every face with some phi != 0.
FaceDerivatives weighted_derivatives(const std::array<double, 3>& r, const std::array<double, 3>& phi);

// The four Appendix-A inequalities of the zero-weight estimates, for x, y, z > 0:
//   root       : √(sinh x sinh y sinh z / sinh(x+y+z)) < 1/2
//   over_sinh  : root / sinh(x+y) < 1/2
//   coth       : coth(x+y) · root < cosh(1)/2
//   full       : sinh(2x+y+z) / (sinh(x+y) sinh(x+z)) · root < cosh 1
// `value_*` are the left-hand sides. The `*_holds` flags are decided on their
// logarithms, so a left-hand side that underflows to 0 still counts as positive.
struct AppendixPredicates {
  bool root_holds, over_sinh_holds, coth_holds, full_holds;
  double value_root, value_over_sinh, value_coth, value_full;
  bool all() const { return root_holds && over_sinh_holds && coth_holds && full_holds; }
};
AppendixPredicates appendix_a_predicates(double x, double y, double z);

} // namespace hyperbolic

// Radii and the matching u-coordinates, together with the edge weights.
class WeightedPacking {
public:
  static WeightedPacking from_radii(WeightAssignment weights, Vector r);
  static WeightedPacking from_u(WeightAssignment weights, Vector u);

  const Vector& r() const { return r_; }
  const Vector& u() const { return u_; }
  const WeightAssignment& weights() const { return weights_; }
  int size() const { return static_cast<int>(r_.size()); }

private:
  WeightedPacking() = default;
  WeightAssignment weights_;
  Vector r_;
  Vector u_;
};

struct GeometryState {
  std::vector<double> lengths;               // per edge
  std::vector<std::array<double, 3>> angles; // per face, per corner
  std::vector<double> face_areas;
  Vector K;                                  // per vertex
  double total_area = 0;

  // (2πχ + Area) / N
  double average_curvature(int euler_characteristic) const;
  // Σ K_i − Area − 2πχ; zero up to rounding.
  double gauss_bonnet_residual(int euler_characteristic) const;
};

GeometryState curvatures(const TriangulatedSurface& surface, const WeightedPacking& packing);

// ∂θ_at/∂r_wrt inside face f. Uses the zero-weight closed forms when the face
// has Φ ≡ 0, the cosine-law chain rule otherwise.
double dtheta_dr(const TriangulatedSurface& surface, const WeightedPacking& packing, int face, int at_vertex, int wrt_vertex);

// Face derivatives in u for face f of a packing.
hyperbolic::FaceDerivatives face_derivatives(const TriangulatedSurface& surface, const WeightedPacking& packing, int face);

} // namespace calabi
