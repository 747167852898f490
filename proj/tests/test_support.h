#pragma once

// Fixtures and random generators shared by the test binaries.

#include "calabi/hyperbolic.h"
#include "calabi/io.h"
#include "calabi/mesh.h"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace calabi::testing {

inline std::string data_path(const std::string& name) { return std::string(CALABI_TEST_DATA) + "/" + name; }

inline TriangulatedSurface fixture(const std::string& name) { return io::read_mesh(data_path(name + ".mesh")); }

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

inline Vector random_radii(std::mt19937_64& rng, int n, double lo = 0.1, double hi = 10.0) {
  Vector r(n);
  for (int i = 0; i < n; ++i) r[i] = log_uniform(rng, lo, hi);
  return r;
}

// Uniform weights in [0, π/2]; with `pinned` > 0 that many edges (at random)
// are set exactly to π/2.
inline WeightAssignment random_weights(std::mt19937_64& rng, const TriangulatedSurface& s, int pinned = 0) {
  std::uniform_real_distribution<double> d(0.0, std::numbers::pi / 2);
  std::vector<double> phi(s.edge_count());
  for (double& p : phi) p = d(rng);
  std::uniform_int_distribution<int> pick(0, s.edge_count() - 1);
  for (int k = 0; k < pinned; ++k) phi[pick(rng)] = std::numbers::pi / 2;
  return WeightAssignment(s, std::move(phi));
}

inline Vector curvature_at(const TriangulatedSurface& s, const WeightAssignment& w, const Vector& u) {
  return curvatures(s, WeightedPacking::from_u(w, u)).K;
}

} // namespace calabi::testing
