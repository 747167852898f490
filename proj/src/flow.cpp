#include "calabi/flow.h"

#include "calabi/errors.h"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace calabi {

std::string to_string(Termination t) {
  switch (t) {
  case Termination::Converged: return "Converged";
  case Termination::MaxTime: return "MaxTime";
  case Termination::MaxSteps: return "MaxSteps";
  case Termination::BlowupGuard: return "BlowupGuard";
  case Termination::StepFailure: return "StepFailure";
  }
  return "Unknown";
}

double calabi_energy(const Vector& K, const Vector& target) {
  if (target.size() == 0) return K.squaredNorm();
  if (target.size() != K.size()) throw DimensionMismatch("target curvature has the wrong length");
  return (K - target).squaredNorm();
}

double calabi_energy(const GeometryState& geometry, const Vector& target) { return calabi_energy(geometry.K, target); }

Vector flow_velocity(const DualLaplacian& lap, const Vector& K, const Vector& target) {
  if (K.size() != lap.size()) throw DimensionMismatch("curvature vector has the wrong length");
  if (target.size() == 0) return -lap.multiply(K);
  if (target.size() != K.size()) throw DimensionMismatch("target curvature has the wrong length");
  return lap.multiply(target - K);
}

namespace {

struct Evaluation {
  WeightedPacking packing;
  GeometryState geometry;
  DualLaplacian lap;
  Vector velocity;
  double energy;
};

// Everything the integrator needs at one point in u-space; nullopt when the
// point lies outside the guarded domain u < -guard.
std::optional<Evaluation> evaluate(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& u,
                                   const Vector& target, double guard) {
  if (!u.allFinite() || u.maxCoeff() > -guard) return std::nullopt;
  try {
    auto packing = WeightedPacking::from_u(weights, u);
    auto geometry = curvatures(surface, packing);
    auto lap = assemble(surface, packing);
    Vector velocity = flow_velocity(lap, geometry.K, target);
    const double energy = calabi_energy(geometry.K, target);
    return Evaluation{std::move(packing), std::move(geometry), std::move(lap), std::move(velocity), energy};
  } catch (const DomainError&) {
    return std::nullopt;
  } catch (const TriangleInequalityViolation&) {
    return std::nullopt;
  }
}

double residual_inf(const Vector& K, const Vector& target) {
  return target.size() == 0 ? K.lpNorm<Eigen::Infinity>() : (K - target).lpNorm<Eigen::Infinity>();
}

FlowSample make_sample(double t, double h, const Evaluation& ev, const FlowConfig& config, bool with_lambda) {
  FlowSample s;
  s.t = t;
  s.h_used = h;
  s.energy = ev.energy;
  s.max_abs_K = ev.geometry.K.lpNorm<Eigen::Infinity>();
  s.max_K = ev.geometry.K.maxCoeff();
  s.min_r = ev.packing.r().minCoeff();
  s.max_r = ev.packing.r().maxCoeff();
  s.above_ceiling = s.max_K > config.curvature_ceiling;
  if (config.record_vectors) {
    s.u = ev.packing.u();
    s.K = ev.geometry.K;
  }
  if (with_lambda) {
    try {
      s.lambda1 = min_eigenvalue(ev.lap);
    } catch (const Error&) {
      s.lambda1.reset();
    }
  }
  return s;
}

// Dormand–Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

} // namespace

std::optional<double> fit_log_energy_rate(const std::vector<FlowSample>& samples, double window) {
  if (samples.size() < 3) return std::nullopt;
  const auto n = samples.size();
  auto start = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - std::clamp(window, 0.0, 1.0))));
  start = std::min(start, n - 3);
  double st = 0, sy = 0, stt = 0, sty = 0;
  int m = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (!(samples[i].energy > 0)) continue;
    const double t = samples[i].t, y = std::log(samples[i].energy);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++m;
  }
  if (m < 3) return std::nullopt;
  const double denom = m * stt - st * st;
  if (!(denom > 0)) return std::nullopt;
  return (m * sty - st * sy) / denom;
}

FlowTrajectory integrate(const TriangulatedSurface& surface, const WeightedPacking& initial, const FlowConfig& config) {
  if (!(config.h0 > 0) || !(config.tol > 0) || !(config.blowup_guard > 0) || !(config.max_time > 0))
    throw DomainError("flow configuration needs positive h0, tol, blowup_guard and max_time");
  if (!(config.curvature_ceiling < 2 * std::numbers::pi)) throw DomainError("curvature ceiling must be below 2*pi");
  if (initial.size() != surface.vertex_count()) throw DimensionMismatch("packing does not match surface");
  const Vector& target = config.target;
  if (target.size() != 0 && target.size() != surface.vertex_count()) throw DimensionMismatch("target curvature has the wrong length");

  const WeightAssignment& weights = initial.weights();
  FlowTrajectory traj;
  traj.zero_weights = weights.all_zero();

  auto current = evaluate(surface, weights, initial.u(), target, config.blowup_guard);
  if (!current) {
    traj.termination = Termination::BlowupGuard;
    return traj;
  }

  auto finish = [&](Termination why) {
    traj.termination = why;
    auto& last = traj.samples.back();
    if (!last.lambda1) {
      try {
        last.lambda1 = min_eigenvalue(current->lap);
      } catch (const Error&) {
      }
    }
    traj.final_u = current->packing.u();
    traj.final_K = current->geometry.K;
    traj.fitted_rate = fit_log_energy_rate(traj.samples, config.rate_window);
    return traj;
  };

  double t = 0;
  traj.samples.push_back(make_sample(t, 0.0, *current, config, config.lambda_every > 0));
  if (traj.samples.back().above_ceiling) ++traj.ceiling_flags;
  if (residual_inf(current->geometry.K, target) < config.tol) return finish(Termination::Converged);

  const int n = surface.vertex_count();
  double h = std::min(config.h0, config.max_step);
  long accepted = 0;
  bool last_reject_was_guard = false;
  std::vector<Vector> k(7, Vector(n));

  while (true) {
    if (t >= config.max_time * (1 - 1e-15)) return finish(Termination::MaxTime);
    if (accepted >= config.max_steps) return finish(Termination::MaxSteps);
    if (h < config.min_step) return finish(last_reject_was_guard ? Termination::BlowupGuard : Termination::StepFailure);

    const double step = std::min({h, config.max_step, config.max_time - t});
    const Vector& u = current->packing.u();
    k[0] = current->velocity;

    std::optional<Evaluation> stage;
    bool ok = true;
    for (int s = 1; s < 7 && ok; ++s) {
      Vector us = u;
      for (int j = 0; j < s; ++j)
        if (kA[s][j] != 0.0) us.noalias() += step * kA[s][j] * k[j];
      stage = evaluate(surface, weights, us, target, config.blowup_guard);
      if (!stage) {
        ok = false;
        break;
      }
      k[s] = stage->velocity;
    }
    if (!ok) {
      ++traj.rejected_steps;
      last_reject_was_guard = true;
      h = 0.25 * step;
      continue;
    }

    // The last stage sits at the fifth-order solution.
    Evaluation& next = *stage;
    const Vector& u_new = next.packing.u();
    double err = 0;
    for (int i = 0; i < n; ++i) {
      double e = 0;
      for (int s = 0; s < 7; ++s) e += (kB5[s] - kB4[s]) * k[s][i];
      const double scale = config.local_tol * std::max({1.0, std::abs(u[i]), std::abs(u_new[i])});
      err = std::max(err, std::abs(step * e) / scale);
    }
    if (!(err <= 1.0)) {
      ++traj.rejected_steps;
      last_reject_was_guard = false;
      h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
      continue;
    }
    if (next.energy > current->energy) {
      ++traj.rejected_steps;
      last_reject_was_guard = false;
      h = 0.5 * step;
      continue;
    }

    t += step;
    ++accepted;
    current = std::move(stage);
    last_reject_was_guard = false;
    const bool with_lambda = config.lambda_every > 0 && accepted % config.lambda_every == 0;
    traj.samples.push_back(make_sample(t, step, *current, config, with_lambda));
    if (traj.samples.back().above_ceiling) ++traj.ceiling_flags;
    if (residual_inf(current->geometry.K, target) < config.tol) return finish(Termination::Converged);

    const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h = step * grow;
  }
}

RadiusFloorReport radius_floor_check(const FlowTrajectory& trajectory, const TriangulatedSurface& surface) {
  if (!trajectory.zero_weights) throw DomainError("radius floor bound only applies to zero-weight flows");
  RadiusFloorReport report;
  if (trajectory.samples.empty()) return report;

  const int d = surface.max_degree();
  report.c2 = d * d * std::numbers::pi * (2.0 + std::cosh(1.0));

  // tanh(r/2) = e^u, so c1 = exp(min_i u_i(0)).
  const auto& first = trajectory.samples.front();
  const double log_c1 = first.u.size() ? first.u.minCoeff() : hyperbolic::u_from_r(first.min_r);
  report.c1 = std::exp(log_c1);

  for (std::size_t s = 0; s < trajectory.samples.size(); ++s) {
    const auto& sample = trajectory.samples[s];
    const double log_bound = log_c1 - report.c2 * sample.t;
    const double r_bound = hyperbolic::r_from_u(log_bound);
    if (sample.u.size()) {
      for (int i = 0; i < sample.u.size(); ++i) {
        const double r = hyperbolic::r_from_u(sample.u[i]);
        if (r < r_bound) report.violations.push_back({s, i, r, r_bound});
        if (sample.u[i] < log_bound) report.tanh_violations.push_back({s, i, std::exp(sample.u[i]), std::exp(log_bound)});
      }
    } else {
      if (sample.min_r < r_bound) report.violations.push_back({s, -1, sample.min_r, r_bound});
      if (hyperbolic::u_from_r(sample.min_r) < log_bound)
        report.tanh_violations.push_back({s, -1, std::tanh(0.5 * sample.min_r), std::exp(log_bound)});
    }
  }
  return report;
}

NewtonResult newton_solve(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& target,
                          const Vector& u_init, const NewtonOptions& options) {
  const int n = surface.vertex_count();
  if (u_init.size() != n) throw DimensionMismatch("initial u has the wrong length");
  if (target.size() != 0 && target.size() != n) throw DimensionMismatch("target curvature has the wrong length");
  if (!(u_init.maxCoeff() < 0)) throw DomainError("initial u must be strictly negative");

  auto packing = WeightedPacking::from_u(weights, u_init);
  auto geometry = curvatures(surface, packing);
  Vector residual = target.size() ? Vector(geometry.K - target) : geometry.K;

  for (int it = 0;; ++it) {
    const double res_inf = residual.lpNorm<Eigen::Infinity>();
    if (res_inf < options.tol) return {std::move(packing), it, res_inf};
    if (it == options.max_iterations)
      throw NoConvergence("Newton iteration did not converge, residual " + std::to_string(res_inf), res_inf, it);

    const auto lap = assemble(surface, packing);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(lap.matrix());
    // L is positive definite in exact arithmetic; a failed factorization means
    // the iterate has degenerated (A -> 0 as r -> 0), the no-solution regime.
    if (llt.info() != Eigen::Success)
      throw NoConvergence("Laplacian numerically singular at residual " + std::to_string(res_inf), res_inf, it);
    const Vector delta = llt.solve(-residual);

    const Vector& u = packing.u();
    double alpha = 1.0;
    for (int i = 0; i < n; ++i)
      if (delta[i] > 0) alpha = std::min(alpha, 0.9 * (-u[i]) / delta[i]);

    const double res_norm = residual.norm();
    bool accepted = false;
    for (int b = 0; b < options.max_backtracks; ++b, alpha *= 0.5) {
      Vector trial = u + alpha * delta;
      if (!(trial.maxCoeff() < 0)) continue;
      try {
        auto p = WeightedPacking::from_u(weights, trial);
        auto g = curvatures(surface, p);
        Vector res = target.size() ? Vector(g.K - target) : g.K;
        if (res.norm() <= (1.0 - 1e-4 * alpha) * res_norm) {
          packing = std::move(p);
          geometry = std::move(g);
          residual = std::move(res);
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      } catch (const TriangleInequalityViolation&) {
      }
    }
    if (!accepted) {
      // Rounding floor: the residual cannot shrink any further.
      throw NoConvergence("line search failed, residual " + std::to_string(res_inf), res_inf, it);
    }
    if (packing.u().maxCoeff() > -options.blowup_guard) throw BlowupGuard("Newton iterate reached u_i > -guard");
  }
}

} // namespace calabi
