#pragma once

#include "calabi/hyperbolic.h"
#include "calabi/mesh.h"

#include <cstdint>
#include <string>
#include <vector>

namespace calabi {

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  int max_depth = 30;
};

// f(u) = ∫_{u0}^{u} Σ_i (K_i - K_i(u0)) du_i, the Ricci potential based at u0.
struct RicciPotentialValue {
  double value = 0;
  Vector base_point;
  std::string path;
  long evaluations = 0; // curvature evaluations spent by the quadrature
};

// Along the straight segment u0 → u.
RicciPotentialValue ricci_potential(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& u0,
                                    const Vector& u, const QuadratureOptions& options = {});

// Along the polyline u0 → waypoints... → u. The 1-form is closed, so the value
// does not depend on the waypoints.
RicciPotentialValue ricci_potential_along(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& u0,
                                          const std::vector<Vector>& waypoints, const Vector& u,
                                          const QuadratureOptions& options = {});

struct RayProbe {
  Vector direction;          // unit, all components ≤ 0
  std::vector<double> radii;
  std::vector<double> values;
  bool nondecreasing_after_min = true;
  double min_growth = 0;     // smallest forward difference past the first local minimum
  double min_second_difference = 0;
};

struct PropernessReport {
  std::vector<RayProbe> rays;
  bool all_increasing_at_large_radius() const;
  double min_second_difference() const;
};

// Samples f along `rays` rays leaving u0 into the negative orthant (the first
// ray is the diagonal -(1,…,1)/√N, the rest are seeded random), at
// `samples_per_ray` equally spaced radii up to radius_max. A numerical check
// of properness, not a proof.
PropernessReport properness_probe(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& u0, int rays,
                                  double radius_max, int samples_per_ray = 24, std::uint64_t seed = 1,
                                  const QuadratureOptions& options = {});

} // namespace calabi
