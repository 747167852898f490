#pragma once

#include "calabi/hyperbolic.h"
#include "calabi/laplacian.h"
#include "calabi/mesh.h"

#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace calabi {

struct FlowConfig {
  Vector target;                 // K̄; empty means K̄ = 0
  double h0 = 1e-2;              // initial step
  double tol = 1e-8;             // stop when ‖K - K̄‖∞ < tol
  double max_time = 1e4;
  long max_steps = 50'000'000;
  double blowup_guard = 1e-12;   // abort when some u_i > -blowup_guard
  double curvature_ceiling = 2 * std::numbers::pi - 1e-2;
  double local_tol = 1e-10;      // embedded error estimate, relative to max(1, |u|)
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;
  int lambda_every = 0;          // record λ1 every n accepted steps; 0: final sample only
  double rate_window = 0.25;     // trailing fraction of samples used by fitted_rate
  bool record_vectors = true;    // keep u and K on every sample
};

enum class Termination { Converged, MaxTime, MaxSteps, BlowupGuard, StepFailure };

std::string to_string(Termination t);

struct FlowSample {
  double t = 0;
  Vector u;
  Vector K;
  double energy = 0;
  std::optional<double> lambda1;
  double h_used = 0;
  double max_abs_K = 0;
  double max_K = 0;
  double min_r = 0;
  double max_r = 0;
  bool above_ceiling = false;
};

struct FlowTrajectory {
  std::vector<FlowSample> samples;
  Termination termination = Termination::MaxSteps;
  std::optional<double> fitted_rate; // least-squares slope of ln 𝒞(t) over the tail
  long rejected_steps = 0;
  long ceiling_flags = 0;            // samples with max K_i above the ceiling
  bool zero_weights = false;         // Φ ≡ 0 on the run's surface
  Vector final_u;
  Vector final_K;

  const FlowSample& last() const { return samples.back(); }
  bool converged() const { return termination == Termination::Converged; }
};

// Σ (K_i - K̄_i)²; an empty target means K̄ = 0.
double calabi_energy(const Vector& K, const Vector& target = {});
double calabi_energy(const GeometryState& geometry, const Vector& target = {});

// L (K̄ - K). With K̄ = 0 this is -L K = -½ ∇_u 𝒞.
Vector flow_velocity(const DualLaplacian& lap, const Vector& K, const Vector& target = {});

// Integrates du/dt = L (K̄ - K) with an adaptive Dormand–Prince 5(4) scheme.
// Steps that raise the energy or push some u_i above -blowup_guard are
// rejected and retried with a smaller step.
FlowTrajectory integrate(const TriangulatedSurface& surface, const WeightedPacking& initial, const FlowConfig& config);

// Least-squares slope of ln energy against t over the trailing `window`
// fraction of samples; nullopt if fewer than 3 usable samples.
std::optional<double> fit_log_energy_rate(const std::vector<FlowSample>& samples, double window);

struct RadiusFloorViolation {
  std::size_t sample;
  int vertex;
  double r;
  double bound;
};

// Lower bound r_i(t) ≥ 2 artanh(c1 e^{-c2 t}) for zero-weight flows with
// c1 = min_i tanh(r_i(0)/2) and c2 = d² π (2 + cosh 1).
struct RadiusFloorReport {
  double c1 = 0;
  double c2 = 0;
  std::vector<RadiusFloorViolation> violations;      // r_i(t) below the bound
  std::vector<RadiusFloorViolation> tanh_violations; // tanh(r_i/2) < c1 e^{-c2 t}
  bool holds() const { return violations.empty() && tanh_violations.empty(); }
};

RadiusFloorReport radius_floor_check(const FlowTrajectory& trajectory, const TriangulatedSurface& surface);

struct NewtonOptions {
  double tol = 1e-12;           // on ‖K - K̄‖∞
  int max_iterations = 200;
  int max_backtracks = 60;
  double blowup_guard = 1e-12;
};

struct NewtonResult {
  WeightedPacking packing;
  int iterations;
  double residual; // ‖K - K̄‖∞ at the returned point
};

// Damped Newton on K(u) = K̄ with the exact Jacobian L. Throws NoConvergence
// (no admissible solution, e.g. K̄ = 0 on χ ≥ 0) or BlowupGuard.
NewtonResult newton_solve(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& target,
                          const Vector& u_init, const NewtonOptions& options = {});

} // namespace calabi
