#include "calabi/potential.h"

#include "calabi/errors.h"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace calabi {

namespace {

class SegmentIntegrand {
public:
  SegmentIntegrand(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& from, const Vector& to,
                   const Vector& reference)
      : surface_(surface), weights_(weights), from_(from), dir_(to - from), reference_(reference) {}

  double operator()(double s) {
    ++evaluations;
    Vector u = from_ + s * dir_;
    const auto g = curvatures(surface_, WeightedPacking::from_u(weights_, std::move(u)));
    return (g.K - reference_).dot(dir_);
  }

  long evaluations = 0;

private:
  const TriangulatedSurface& surface_;
  const WeightAssignment& weights_;
  Vector from_;
  Vector dir_;
  const Vector& reference_;
};

using Rule = boost::math::quadrature::gauss<double, 10>;

// Adaptive Gauss–Legendre: accept a panel when the 10-point rule on it agrees
// with the sum over its two halves.
double adaptive(SegmentIntegrand& f, double a, double b, double whole, int depth, const QuadratureOptions& opt) {
  const double m = 0.5 * (a + b);
  const double left = Rule::integrate(std::ref(f), a, m);
  const double right = Rule::integrate(std::ref(f), m, b);
  const double refined = left + right;
  if (std::abs(refined - whole) <= std::max(opt.abs_tol, opt.rel_tol * std::abs(refined))) return refined;
  if (depth >= opt.max_depth)
    throw QuadratureFailure("quadrature did not reach tolerance at subdivision depth " + std::to_string(depth));
  QuadratureOptions sub = opt;
  sub.abs_tol = 0.5 * opt.abs_tol;
  return adaptive(f, a, m, left, depth + 1, sub) + adaptive(f, m, b, right, depth + 1, sub);
}

double segment_integral(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& from, const Vector& to,
                        const Vector& reference, const QuadratureOptions& options, long& evaluations) {
  if ((to - from).squaredNorm() == 0.0) return 0.0;
  SegmentIntegrand f(surface, weights, from, to, reference);
  const double whole = Rule::integrate(std::ref(f), 0.0, 1.0);
  const double value = adaptive(f, 0.0, 1.0, whole, 0, options);
  evaluations += f.evaluations;
  return value;
}

void require_negative(const Vector& u, const char* what) {
  if (!(u.size() > 0 && u.maxCoeff() < 0)) throw DomainError(std::string(what) + " must be strictly negative");
}

} // namespace

RicciPotentialValue ricci_potential_along(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& u0,
                                          const std::vector<Vector>& waypoints, const Vector& u, const QuadratureOptions& options) {
  const int n = surface.vertex_count();
  if (u0.size() != n || u.size() != n) throw DimensionMismatch("u-vectors do not match the surface");
  require_negative(u0, "base point");
  require_negative(u, "evaluation point");
  for (const auto& w : waypoints) {
    if (w.size() != n) throw DimensionMismatch("waypoint does not match the surface");
    require_negative(w, "waypoint");
  }

  const Vector reference = curvatures(surface, WeightedPacking::from_u(weights, u0)).K;

  RicciPotentialValue out;
  out.base_point = u0;
  out.path = waypoints.empty() ? "segment" : "polyline with " + std::to_string(waypoints.size()) + " waypoint(s)";
  Vector from = u0;
  for (const auto& w : waypoints) {
    out.value += segment_integral(surface, weights, from, w, reference, options, out.evaluations);
    from = w;
  }
  out.value += segment_integral(surface, weights, from, u, reference, options, out.evaluations);
  return out;
}

RicciPotentialValue ricci_potential(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& u0,
                                    const Vector& u, const QuadratureOptions& options) {
  return ricci_potential_along(surface, weights, u0, {}, u, options);
}

bool PropernessReport::all_increasing_at_large_radius() const {
  return std::all_of(rays.begin(), rays.end(), [](const RayProbe& r) { return r.nondecreasing_after_min && r.min_growth > 0; });
}

double PropernessReport::min_second_difference() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rays) m = std::min(m, r.min_second_difference);
  return m;
}

PropernessReport properness_probe(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& u0, int rays,
                                  double radius_max, int samples_per_ray, std::uint64_t seed, const QuadratureOptions& options) {
  const int n = surface.vertex_count();
  if (u0.size() != n) throw DimensionMismatch("base point does not match the surface");
  require_negative(u0, "base point");
  if (rays < 1 || samples_per_ray < 3 || !(radius_max > 0)) throw DomainError("properness probe needs rays >= 1, samples >= 3, radius > 0");

  const Vector reference = curvatures(surface, WeightedPacking::from_u(weights, u0)).K;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  PropernessReport report;
  for (int ray = 0; ray < rays; ++ray) {
    Vector dir(n);
    if (ray == 0) {
      dir.setConstant(-1.0);
    } else {
      for (int i = 0; i < n; ++i) dir[i] = -std::abs(normal(rng));
    }
    dir.normalize();

    RayProbe probe;
    probe.direction = dir;
    probe.radii.push_back(0.0);
    probe.values.push_back(0.0);
    long evaluations = 0;
    double value = 0;
    Vector prev = u0;
    // Cumulative integration along the ray: f(t_{k+1}) = f(t_k) + ∫_{t_k}^{t_{k+1}}.
    for (int k = 1; k <= samples_per_ray; ++k) {
      const double t = radius_max * k / samples_per_ray;
      Vector next = u0 + t * dir;
      value += segment_integral(surface, weights, prev, next, reference, options, evaluations);
      probe.radii.push_back(t);
      probe.values.push_back(value);
      prev = std::move(next);
    }

    const auto& v = probe.values;
    std::size_t first_min = 0;
    while (first_min + 1 < v.size() && v[first_min + 1] < v[first_min]) ++first_min;
    probe.min_growth = std::numeric_limits<double>::infinity();
    for (std::size_t k = first_min; k + 1 < v.size(); ++k) {
      const double growth = v[k + 1] - v[k];
      probe.min_growth = std::min(probe.min_growth, growth);
      if (growth < 0) probe.nondecreasing_after_min = false;
    }
    probe.min_second_difference = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < v.size(); ++k)
      probe.min_second_difference = std::min(probe.min_second_difference, v[k + 1] - 2 * v[k] + v[k - 1]);
    report.rays.push_back(std::move(probe));
  }
  return report;
}

} // namespace calabi
