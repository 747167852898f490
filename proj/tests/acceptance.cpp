// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "calabi/cli.h"
#include "calabi/errors.h"
#include "calabi/flow.h"
#include "calabi/laplacian.h"
#include "calabi/potential.h"
#include "test_support.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

namespace calabi {
namespace {

using std::numbers::pi;
using testing::curvature_at;
using testing::fixture;
namespace fs = std::filesystem;

const char* const kFixtures[] = {"tetrahedron", "octahedron", "torus", "genus2"};

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds; // 0: no runtime limit
  std::function<Outcome()> body;
};

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

Vector u_of(const Vector& r) {
  Vector u(r.size());
  for (int i = 0; i < r.size(); ++i) u[i] = hyperbolic::u_from_r(r[i]);
  return u;
}

// Flow runs shared by criteria 5 and 10.
struct FlowCase {
  std::string label;
  TriangulatedSurface surface;
  FlowTrajectory trajectory;
};

std::vector<FlowCase> flow_corpus() {
  std::vector<FlowCase> corpus;
  auto add = [&](std::string label, TriangulatedSurface s, const WeightAssignment& w, const Vector& r0, FlowConfig config) {
    auto traj = integrate(s, WeightedPacking::from_radii(w, r0), config);
    corpus.push_back({std::move(label), std::move(s), std::move(traj)});
  };
  auto g2 = fixture("genus2");
  add("genus2 unit", g2, WeightAssignment(g2), Vector::Ones(10), {});
  for (std::uint64_t seed : {1, 2, 3}) add("genus2 rand:" + std::to_string(seed), g2, WeightAssignment(g2), io::random_radii(10, seed), {});

  auto tet = fixture("tetrahedron");
  FlowConfig sphere;
  sphere.max_time = 1e3;
  add("tetrahedron K=0", tet, WeightAssignment(tet), Vector::Ones(4), sphere);

  std::mt19937_64 rng(1001);
  for (const char* name : kFixtures) {
    for (int weighted = 0; weighted < 2; ++weighted) {
      auto s = fixture(name);
      auto w = weighted ? testing::random_weights(rng, s, 2) : WeightAssignment(s);
      FlowConfig config;
      config.target = curvature_at(s, w, u_of(testing::random_radii(rng, s.vertex_count(), 0.3, 3.0)));
      add(std::string(name) + (weighted ? " weighted" : "") + " target", s, w, testing::random_radii(rng, s.vertex_count(), 0.3, 3.0),
          config);
    }
  }
  return corpus;
}

const std::vector<FlowCase>& corpus() {
  static const std::vector<FlowCase> c = flow_corpus();
  return c;
}

Outcome gauss_bonnet() {
  std::mt19937_64 rng(1);
  double worst = 0;
  for (const char* name : kFixtures) {
    auto s = fixture(name);
    const int chi = s.euler_characteristic();
    for (int k = 0; k < 100; ++k) {
      auto w = k % 2 ? testing::random_weights(rng, s, 1) : WeightAssignment(s);
      auto g = curvatures(s, WeightedPacking::from_radii(w, testing::random_radii(rng, s.vertex_count())));
      worst = std::max(worst, std::abs(g.gauss_bonnet_residual(chi)));
    }
  }
  return {worst < 1e-10, "max |sum K - area - 2 pi chi| = " + fmt(worst)};
}

Outcome jacobian() {
  std::mt19937_64 rng(2);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto s = fixture(kFixtures[trial % 4]);
    auto w = trial % 5 == 0 ? WeightAssignment(s) : testing::random_weights(rng, s, 3);
    Vector u = u_of(testing::random_radii(rng, s.vertex_count(), 0.1, 5.0));
    Eigen::MatrixXd L = assemble(s, WeightedPacking::from_u(w, u)).dense();
    for (int j = 0; j < s.vertex_count(); ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(u[j]));
      Vector up = u, um = u;
      up[j] += h;
      um[j] -= h;
      Vector fd = (curvature_at(s, w, up) - curvature_at(s, w, um)) / (2 * h);
      worst = std::max(worst, (fd - L.col(j)).norm() / L.col(j).norm());
    }
  }
  return {worst < 1e-6, "max columnwise relative error " + fmt(worst)};
}

Outcome positivity() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  int failures = 0;
  double min_lambda = INFINITY, min_q = INFINITY;
  for (int trial = 0; trial < 200; ++trial) {
    auto s = fixture(kFixtures[trial % 4]);
    auto w = trial % 2 ? testing::random_weights(rng, s, 3) : WeightAssignment(s);
    auto lap = assemble(s, WeightedPacking::from_radii(w, testing::random_radii(rng, s.vertex_count())));
    if (!cholesky_succeeds(lap.matrix())) {
      ++failures;
      continue;
    }
    min_lambda = std::min(min_lambda, min_eigenvalue(lap));
    if (trial < 4) {
      for (int k = 0; k < 1000; ++k) {
        Vector x(s.vertex_count());
        for (auto& xi : x) xi = nd(rng);
        min_q = std::min(min_q, lap.graph_quadratic_form(x));
      }
    }
  }
  return {failures == 0 && min_lambda > 0 && min_q >= 0,
          std::to_string(failures) + " Cholesky failures over 200, min lambda1 " + fmt(min_lambda) + ", min x'L_B x " + fmt(min_q)};
}

Outcome zero_weight_bounds() {
  std::mt19937_64 rng(4);
  long bad_triples = 0;
  for (int k = 0; k < 100000; ++k) {
    const double x = testing::log_uniform(rng, 1e-6, 1e3), y = testing::log_uniform(rng, 1e-6, 1e3), z = testing::log_uniform(rng, 1e-6, 1e3);
    if (!hyperbolic::appendix_a_predicates(x, y, z).all()) ++bad_triples;
  }
  const double cosh1 = std::cosh(1.0);
  long bad_packings = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    auto s = fixture(kFixtures[trial % 4]);
    auto packing = WeightedPacking::from_radii(WeightAssignment(s), testing::random_radii(rng, s.vertex_count(), 1e-3, 50));
    auto lap = assemble(s, packing);
    bool ok = true;
    for (int e = 0; e < s.edge_count(); ++e) ok = ok && lap.B()[e] > 0 && lap.B()[e] < 1;
    for (int v = 0; v < s.vertex_count(); ++v) ok = ok && lap.A()[v] > 0 && lap.A()[v] < s.degree(v) * cosh1;
    for (int f = 0; f < s.face_count(); ++f) {
      auto d = face_derivatives(s, packing, f);
      for (int a = 0; a < 3; ++a) {
        ok = ok && -d.d[a][a] > 0 && -d.d[a][a] < cosh1 && d.area_u[a] > 0 && d.area_u[a] < cosh1;
        for (int b = 0; b < 3; ++b)
          if (a != b) ok = ok && d.d[a][b] > 0 && d.d[a][b] < 0.5;
      }
    }
    if (!ok) ++bad_packings;
  }
  return {bad_triples == 0 && bad_packings == 0,
          std::to_string(bad_triples) + " of 1e5 triples and " + std::to_string(bad_packings) + " of 1e4 packings violate a bound"};
}

Outcome energy_descent() {
  long increases = 0, steps = 0;
  for (const auto& c : corpus()) {
    const auto& samples = c.trajectory.samples;
    for (std::size_t k = 1; k < samples.size(); ++k) {
      ++steps;
      if (samples[k].energy > samples[k - 1].energy + 1e-12) ++increases;
    }
  }
  return {increases == 0, std::to_string(increases) + " increases over " + std::to_string(steps) + " accepted steps in " +
                              std::to_string(corpus().size()) + " runs"};
}

Outcome genus_two_convergence() {
  auto s = fixture("genus2");
  WeightAssignment w(s);
  auto traj = integrate(s, WeightedPacking::from_radii(w, Vector::Ones(10)), {});
  if (!traj.converged()) return {false, "terminated " + to_string(traj.termination)};
  const double residual = traj.final_K.lpNorm<Eigen::Infinity>();
  const double lambda1 = min_eigenvalue(assemble(s, WeightedPacking::from_u(w, traj.final_u)));
  const double bound = -2 * lambda1 * lambda1 * 0.9;
  const double slope = traj.fitted_rate.value_or(0);
  const auto newton = newton_solve(s, w, {}, Vector::Constant(10, hyperbolic::u_from_r(1.0)));
  const double du = (traj.final_u - newton.packing.u()).lpNorm<Eigen::Infinity>();
  return {residual < 1e-8 && traj.last().t <= 1e4 && traj.fitted_rate && slope <= bound && du < 1e-6,
          "|K|_inf " + fmt(residual) + " at t = " + fmt(traj.last().t) + ", slope " + fmt(slope) + " <= " + fmt(bound) +
              ", |u_flow - u_newton|_inf " + fmt(du)};
}

Outcome rigidity() {
  auto s = fixture("genus2");
  WeightAssignment w(s);
  std::vector<Vector> limits;
  for (std::uint64_t seed : {11, 12, 13}) {
    const Vector r0 = io::random_radii(10, seed);
    auto traj = integrate(s, WeightedPacking::from_radii(w, r0), {});
    if (!traj.converged()) return {false, "flow from seed " + std::to_string(seed) + " " + to_string(traj.termination)};
    limits.push_back(traj.final_u);
    limits.push_back(newton_solve(s, w, {}, u_of(r0)).packing.u());
  }
  double spread = 0;
  for (const auto& u : limits) spread = std::max(spread, (u - limits[0]).lpNorm<Eigen::Infinity>());
  return {spread < 1e-6, "max distance between 6 limits " + fmt(spread)};
}

Outcome negative_control() {
  auto s = fixture("tetrahedron");
  FlowConfig config;
  config.max_time = 1e3;
  auto traj = integrate(s, WeightedPacking::from_radii(WeightAssignment(s), Vector::Ones(4)), config);
  double floor = INFINITY;
  for (const auto& sample : traj.samples) floor = std::min(floor, sample.energy);
  // Sum K = 4 pi + Area > 4 pi and Cauchy-Schwarz give energy > (4 pi)^2 / 4.
  const double bound = 4 * pi * pi;
  return {!traj.converged() && floor > bound,
          "terminated " + to_string(traj.termination) + " at t = " + fmt(traj.last().t) + ", min energy " + fmt(floor, 10) + " > " + fmt(bound, 10)};
}

Outcome curvature_evolution() {
  auto s = fixture("genus2");
  WeightAssignment w(s);
  FlowConfig config;
  config.max_step = 1e-2;
  auto traj = integrate(s, WeightedPacking::from_radii(w, Vector::Ones(10)), config);
  if (!traj.converged()) return {false, "terminated " + to_string(traj.termination)};
  double worst = 0;
  for (std::size_t k = 0; k + 1 < traj.samples.size(); ++k) {
    const auto& a = traj.samples[k];
    const auto& b = traj.samples[k + 1];
    Vector dKdt = (b.K - a.K) / (b.t - a.t);
    auto mid = WeightedPacking::from_u(w, 0.5 * (a.u + b.u));
    auto lap = assemble(s, mid);
    Vector predicted = -lap.multiply(lap.multiply(curvatures(s, mid).K));
    worst = std::max(worst, (dKdt - predicted).norm() / predicted.norm());
  }
  return {worst <= 5e-3, "max relative error " + fmt(worst) + " over " + std::to_string(traj.samples.size() - 1) + " steps"};
}

Outcome radius_floor() {
  int runs = 0, failed = 0;
  for (const auto& c : corpus()) {
    if (!c.trajectory.zero_weights) continue;
    ++runs;
    if (!radius_floor_check(c.trajectory, c.surface).holds()) ++failed;
  }
  return {runs > 0 && failed == 0, std::to_string(failed) + " of " + std::to_string(runs) + " zero-weight runs violate the floor"};
}

Outcome ricci_potential_checks() {
  std::mt19937_64 rng(11);
  auto random_u = [&](int n) { return u_of(testing::random_radii(rng, n, 0.3, 3.0)); };

  double path_gap = 0;
  for (const char* name : {"tetrahedron", "torus", "genus2"}) {
    auto s = fixture(name);
    auto w = testing::random_weights(rng, s, 2);
    const int n = s.vertex_count();
    Vector u0 = random_u(n), u = random_u(n), mid = random_u(n);
    path_gap = std::max(path_gap, std::abs(ricci_potential(s, w, u0, u).value - ricci_potential_along(s, w, u0, {mid}, u).value));
  }

  auto s = fixture("genus2");
  auto w = testing::random_weights(rng, s, 2);
  Vector u0 = random_u(10), u = random_u(10);
  const Eigen::MatrixXd L = assemble(s, WeightedPacking::from_u(w, u)).dense();
  const double h = 1e-3;
  auto f = [&](const Vector& x) { return ricci_potential(s, w, u0, x).value; };
  Eigen::MatrixXd H(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = i; j < 10; ++j) {
      Vector pp = u, pm = u, mp = u, mm = u;
      pp[i] += h, pp[j] += h, pm[i] += h, pm[j] -= h, mp[i] -= h, mp[j] += h, mm[i] -= h, mm[j] -= h;
      H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
    }
  const double hessian_err = (H - L).norm() / L.norm();

  // f based at u0 along the flow towards K(u0).
  FlowConfig config;
  config.target = curvature_at(s, w, u0);
  auto traj = integrate(s, WeightedPacking::from_u(w, random_u(10)), config);
  double worst_rise = 0;
  const std::size_t stride = std::max<std::size_t>(1, traj.samples.size() / 40);
  double prev = INFINITY;
  for (std::size_t k = 0; k < traj.samples.size(); k += stride) {
    const double v = ricci_potential(s, w, u0, traj.samples[k].u).value;
    if (std::isfinite(prev)) worst_rise = std::max(worst_rise, v - prev);
    prev = v;
  }

  WeightAssignment zero(s);
  const Vector u_star = newton_solve(s, zero, {}, Vector::Constant(10, -1.0)).packing.u();
  auto probe = properness_probe(s, zero, u_star, 6, 30.0);

  const bool pass = path_gap < 1e-8 && hessian_err < 1e-4 && traj.converged() && worst_rise <= 1e-10 && probe.all_increasing_at_large_radius();
  return {pass, "path gap " + fmt(path_gap) + ", Hessian error " + fmt(hessian_err) + ", max rise along flow " + fmt(worst_rise) +
                    ", rays increasing: " + (probe.all_increasing_at_large_radius() ? "all" : "not all")};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "calabi_acceptance_determinism";
  fs::remove_all(dir);
  auto flow_csv = [&](const std::string& seed, const std::string& tag) {
    std::ostringstream out, err;
    cli::run({"flow", "--mesh", testing::data_path("genus2.mesh"), "--radii", "rand:" + seed, "--quiet", "--out", (dir / tag).string()}, out,
             err);
    std::ifstream f(dir / tag / "trajectory.csv", std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  int identical = 0;
  for (const char* seed : {"7", "8", "9"})
    if (const auto a = flow_csv(seed, std::string(seed) + "a"); !a.empty() && a == flow_csv(seed, std::string(seed) + "b")) ++identical;
  fs::remove_all(dir);
  return {identical == 3, std::to_string(identical) + " of 3 seeds gave byte-identical trajectory CSVs"};
}

} // namespace
} // namespace calabi

int main() {
  using namespace calabi;
  const std::vector<Criterion> criteria = {
      {1, "gauss-bonnet", 5, gauss_bonnet},
      {2, "jacobian", 30, jacobian},
      {3, "positivity", 0, positivity},
      {4, "zero-weight bounds", 60, zero_weight_bounds},
      {5, "energy descent", 0, energy_descent},
      {6, "genus-2 convergence", 120, genus_two_convergence},
      {7, "rigidity", 0, rigidity},
      {8, "negative control", 0, negative_control},
      {9, "curvature evolution", 0, curvature_evolution},
      {10, "radius floor", 0, radius_floor},
      {11, "ricci potential", 0, ricci_potential_checks},
      {12, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt(seconds) + " s";
    if (c.budget_seconds > 0) {
      timing += " of " + fmt(c.budget_seconds) + " s";
      if (seconds >= c.budget_seconds) o.pass = false;
    }
    std::printf("%s %2d %-20s %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
