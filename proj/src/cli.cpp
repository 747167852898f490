#include "calabi/cli.h"

#include "calabi/errors.h"
#include "calabi/flow.h"
#include "calabi/io.h"
#include "calabi/laplacian.h"
#include "calabi/potential.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <thread>

namespace calabi::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::string subcommand;
  std::string mesh_path;
  std::string weights_path;
  std::string radii = "const:1";
  std::string target_path;
  std::string out_dir;
  double tol = 1e-8;
  double h0 = 1e-2;
  double tmax = 1e4;
  bool json_output = false;
  bool quiet = false;

  // flow
  int lambda_every = 0;
  // curvature
  std::string laplacian_path;
  // potential
  std::string base = "const:1";
  int rays = 8;
  double radius_max = 20;
  int samples = 24;
  std::uint64_t seed = 1;
  // bench
  int runs = 4;
  int jobs = 0;
};

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

struct Loaded {
  TriangulatedSurface surface;
  WeightAssignment weights;
  Vector radii;
  Vector target;
};

Loaded load(const RunConfig& cfg) {
  auto surface = io::read_mesh(cfg.mesh_path);
  auto weights = cfg.weights_path.empty() ? WeightAssignment(surface) : io::read_weights(cfg.weights_path, surface);
  auto radii = io::radii_from_spec(cfg.radii, surface.vertex_count());
  Vector target = cfg.target_path.empty() ? Vector::Zero(surface.vertex_count()) : io::read_vector(cfg.target_path, surface.vertex_count());
  return {std::move(surface), std::move(weights), std::move(radii), std::move(target)};
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream create(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw FileError("cannot write " + path.string());
  return f;
}

class Printer {
public:
  Printer(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}
  // Text line, suppressed in --json and --quiet modes.
  template <class... Args>
  void line(const Args&... args) {
    if (cfg_.quiet || cfg_.json_output) return;
    (out_ << ... << args) << '\n';
  }
  void document(const json& doc) {
    if (cfg_.quiet || !cfg_.json_output) return;
    out_ << doc.dump(2) << '\n';
  }

private:
  const RunConfig& cfg_;
  std::ostream& out_;
};

FlowConfig flow_config(const RunConfig& cfg, const Vector& target) {
  FlowConfig fc;
  fc.target = target;
  fc.tol = cfg.tol;
  fc.h0 = cfg.h0;
  fc.max_time = cfg.tmax;
  fc.lambda_every = cfg.lambda_every;
  return fc;
}

int cmd_check(const RunConfig& cfg, Printer& p) {
  const auto [surface, weights, radii, target] = load(cfg);
  const auto report = check_thurston_conditions(surface, weights);
  json doc = {{"result", report.pass() ? "PASS" : "FAIL"},
              {"conservative", report.conservative},
              {"label", report.label()},
              {"vertices", surface.vertex_count()},
              {"edges", surface.edge_count()},
              {"faces", surface.face_count()},
              {"euler_characteristic", surface.euler_characteristic()},
              {"max_degree", surface.max_degree()}};
  json tri = json::array(), quad = json::array();
  for (const auto& c : report.triangle_violations) tri.push_back({{"vertices", c.vertices}, {"weight_sum", c.weight_sum}});
  for (const auto& c : report.quad_violations) quad.push_back({{"vertices", c.vertices}, {"weight_sum", c.weight_sum}});
  doc["triangle_violations"] = tri;
  doc["quad_violations"] = quad;
  p.document(doc);

  p.line("vertices ", surface.vertex_count(), "  edges ", surface.edge_count(), "  faces ", surface.face_count());
  p.line("chi = ", surface.euler_characteristic(), "  max degree d = ", surface.max_degree());
  for (const auto& c : report.triangle_violations)
    p.line("3-cycle ", c.vertices[0], "-", c.vertices[1], "-", c.vertices[2], " weight sum ", io::format_double(c.weight_sum), " >= pi");
  for (const auto& c : report.quad_violations)
    p.line("4-cycle ", c.vertices[0], "-", c.vertices[1], "-", c.vertices[2], "-", c.vertices[3], " weight sum ",
           io::format_double(c.weight_sum), " >= 2pi");
  p.line(report.label());
  return kOk;
}

int cmd_curvature(const RunConfig& cfg, Printer& p) {
  const auto [surface, weights, radii, target] = load(cfg);
  const auto packing = WeightedPacking::from_radii(weights, radii);
  const auto g = curvatures(surface, packing);
  const int chi = surface.euler_characteristic();
  const double residual = g.gauss_bonnet_residual(chi);

  if (!cfg.laplacian_path.empty()) {
    auto f = create(cfg.laplacian_path);
    assemble(surface, packing).write_coordinates(f);
  }

  p.document({{"chi", chi},
              {"r", to_std(packing.r())},
              {"u", to_std(packing.u())},
              {"K", to_std(g.K)},
              {"edge_lengths", g.lengths},
              {"face_areas", g.face_areas},
              {"total_area", g.total_area},
              {"average_curvature", g.average_curvature(chi)},
              {"calabi_energy", calabi_energy(g)},
              {"gauss_bonnet_residual", residual}});

  p.line("vertex  r  K");
  for (int i = 0; i < surface.vertex_count(); ++i) p.line(i, "  ", io::format_double(packing.r()[i]), "  ", io::format_double(g.K[i]));
  p.line("total area ", io::format_double(g.total_area), "  K_av ", io::format_double(g.average_curvature(chi)));
  p.line("calabi energy ", io::format_double(calabi_energy(g)));
  p.line("gauss-bonnet residual sum K - area - 2 pi chi = ", io::format_double(residual));
  return kOk;
}

int cmd_flow(const RunConfig& cfg, Printer& p) {
  const auto [surface, weights, radii, target] = load(cfg);
  const auto packing = WeightedPacking::from_radii(weights, radii);
  const auto traj = integrate(surface, packing, flow_config(cfg, target));
  const auto& last = traj.last();
  const double residual = traj.final_K.size() ? (traj.final_K - target).lpNorm<Eigen::Infinity>() : std::nan("");

  if (!cfg.out_dir.empty()) {
    ensure_dir(cfg.out_dir);
    auto csv = create(fs::path(cfg.out_dir) / "trajectory.csv");
    io::write_trajectory_csv(traj, csv);
    auto js = create(fs::path(cfg.out_dir) / "trajectory.json");
    js << io::trajectory_json(traj).dump() << '\n';
  }

  std::optional<RadiusFloorReport> floor;
  if (traj.zero_weights) floor = radius_floor_check(traj, surface);

  json doc = {{"termination", to_string(traj.termination)},
              {"steps", traj.samples.size() - 1},
              {"rejected_steps", traj.rejected_steps},
              {"t_final", last.t},
              {"energy", last.energy},
              {"residual_inf", residual},
              {"ceiling_flags", traj.ceiling_flags}};
  doc["lambda1"] = last.lambda1 ? json(*last.lambda1) : json(nullptr);
  doc["fitted_rate"] = traj.fitted_rate ? json(*traj.fitted_rate) : json(nullptr);
  if (floor) doc["radius_floor_holds"] = floor->holds();
  if (traj.final_u.size()) doc["final_r"] = to_std(WeightedPacking::from_u(weights, traj.final_u).r());
  p.document(doc);

  p.line("termination ", to_string(traj.termination), " after ", traj.samples.size() - 1, " steps (", traj.rejected_steps,
         " rejected), t = ", io::format_double(last.t));
  p.line("final |K - target|_inf = ", io::format_double(residual), "  energy = ", io::format_double(last.energy));
  if (last.lambda1) p.line("lambda1 = ", io::format_double(*last.lambda1));
  if (traj.fitted_rate) p.line("fitted tail slope of ln energy = ", io::format_double(*traj.fitted_rate));
  if (traj.ceiling_flags) p.line("warning: ", traj.ceiling_flags, " samples with max K above the curvature ceiling");
  if (floor) p.line("radius floor bound ", floor->holds() ? "holds" : "VIOLATED", " (c1 = ", io::format_double(floor->c1), ")");

  switch (traj.termination) {
  case Termination::Converged: return kOk;
  case Termination::BlowupGuard: return kBlowup;
  default: return kFlowNotConverged;
  }
}

int cmd_solve(const RunConfig& cfg, Printer& p) {
  const auto [surface, weights, radii, target] = load(cfg);
  Vector u0(radii.size());
  for (int i = 0; i < radii.size(); ++i) u0[i] = hyperbolic::u_from_r(radii[i]);
  NewtonOptions opt;
  opt.tol = cfg.tol;
  const auto result = newton_solve(surface, weights, target, u0, opt);
  const auto lap = assemble(surface, result.packing);

  if (!cfg.out_dir.empty()) {
    ensure_dir(cfg.out_dir);
    auto f = create(fs::path(cfg.out_dir) / "radii.txt");
    for (double r : result.packing.r()) f << io::format_double(r) << '\n';
  }
  const double lambda1 = min_eigenvalue(lap);
  p.document({{"iterations", result.iterations},
              {"residual_inf", result.residual},
              {"lambda1", lambda1},
              {"r", to_std(result.packing.r())},
              {"u", to_std(result.packing.u())}});
  p.line("Newton converged in ", result.iterations, " iterations, |K - target|_inf = ", io::format_double(result.residual));
  p.line("lambda1 = ", io::format_double(lambda1));
  for (int i = 0; i < result.packing.size(); ++i) p.line(i, "  r = ", io::format_double(result.packing.r()[i]));
  return kOk;
}

int cmd_potential(const RunConfig& cfg, Printer& p) {
  const auto [surface, weights, radii, target] = load(cfg);
  const Vector base_r = io::radii_from_spec(cfg.base, surface.vertex_count());
  Vector u0(base_r.size()), u(radii.size());
  for (int i = 0; i < u.size(); ++i) {
    u0[i] = hyperbolic::u_from_r(base_r[i]);
    u[i] = hyperbolic::u_from_r(radii[i]);
  }
  const auto value = ricci_potential(surface, weights, u0, u);
  const auto probe = properness_probe(surface, weights, u0, cfg.rays, cfg.radius_max, cfg.samples, cfg.seed);

  json rays = json::array();
  for (const auto& ray : probe.rays)
    rays.push_back({{"radii", ray.radii},
                    {"values", ray.values},
                    {"nondecreasing_after_min", ray.nondecreasing_after_min},
                    {"min_growth", ray.min_growth},
                    {"min_second_difference", ray.min_second_difference}});
  p.document({{"value", value.value},
              {"path", value.path},
              {"evaluations", value.evaluations},
              {"all_rays_increasing", probe.all_increasing_at_large_radius()},
              {"min_second_difference", probe.min_second_difference()},
              {"rays", rays}});

  p.line("f(u) = ", io::format_double(value.value), " (", value.path, ", ", value.evaluations, " curvature evaluations)");
  for (std::size_t k = 0; k < probe.rays.size(); ++k) {
    const auto& ray = probe.rays[k];
    p.line("ray ", k, ": f(", io::format_double(ray.radii.back()), ") = ", io::format_double(ray.values.back()),
           ray.nondecreasing_after_min ? "  increasing" : "  NOT monotone", "  min growth ", io::format_double(ray.min_growth));
  }
  p.line("properness probe: ", probe.all_increasing_at_large_radius() ? "f increasing on all rays" : "f NOT increasing on every ray");
  return kOk;
}

struct BenchRow {
  int run;
  std::string flow_termination;
  std::size_t flow_steps;
  double flow_seconds;
  int newton_iterations;
  double newton_seconds;
  double max_du; // flow limit vs Newton solution
  std::string newton_status;
};

BenchRow bench_one(const TriangulatedSurface& surface, const WeightAssignment& weights, const Vector& target, const RunConfig& cfg, int run) {
  using clock = std::chrono::steady_clock;
  BenchRow row{run, "", 0, 0, -1, 0, std::nan(""), "ok"};
  const Vector radii = io::random_radii(surface.vertex_count(), cfg.seed + static_cast<std::uint64_t>(run));
  const auto packing = WeightedPacking::from_radii(weights, radii);

  auto t0 = clock::now();
  FlowConfig fc = flow_config(cfg, target);
  fc.record_vectors = false;
  const auto traj = integrate(surface, packing, fc);
  row.flow_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  row.flow_termination = to_string(traj.termination);
  row.flow_steps = traj.samples.size() - 1;

  t0 = clock::now();
  try {
    NewtonOptions opt;
    opt.tol = std::min(cfg.tol, 1e-10);
    const auto result = newton_solve(surface, weights, target, packing.u(), opt);
    row.newton_iterations = result.iterations;
    if (traj.final_u.size()) row.max_du = (traj.final_u - result.packing.u()).lpNorm<Eigen::Infinity>();
  } catch (const NoConvergence&) {
    row.newton_status = "NoConvergence";
  } catch (const BlowupGuard&) {
    row.newton_status = "BlowupGuard";
  }
  row.newton_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return row;
}

int cmd_bench(const RunConfig& cfg, Printer& p) {
  const auto [surface, weights, radii, target] = load(cfg);
  const int jobs = cfg.jobs > 0 ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());

  // Workers pull run indices; rows are merged in run order afterwards.
  std::vector<BenchRow> rows(cfg.runs);
  std::atomic<int> next{0};
  std::vector<std::future<void>> workers;
  for (int w = 0; w < std::min(jobs, cfg.runs); ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (int k = next++; k < cfg.runs; k = next++) rows[k] = bench_one(surface, weights, target, cfg, k);
    }));
  }
  for (auto& w : workers) w.get();

  json table = json::array();
  for (const auto& r : rows)
    table.push_back({{"run", r.run},
                     {"seed", cfg.seed + static_cast<std::uint64_t>(r.run)},
                     {"flow_termination", r.flow_termination},
                     {"flow_steps", r.flow_steps},
                     {"flow_seconds", r.flow_seconds},
                     {"newton_status", r.newton_status},
                     {"newton_iterations", r.newton_iterations},
                     {"newton_seconds", r.newton_seconds},
                     {"max_abs_du", std::isnan(r.max_du) ? json(nullptr) : json(r.max_du)}});
  p.document({{"runs", table}});

  std::ostringstream header;
  header << std::left << std::setw(5) << "run" << std::setw(13) << "flow" << std::setw(10) << "steps" << std::setw(12) << "flow_s"
         << std::setw(15) << "newton" << std::setw(7) << "iters" << std::setw(12) << "newton_s" << "max|du|";
  p.line(header.str());
  for (const auto& r : rows) {
    std::ostringstream row;
    row << std::left << std::setw(5) << r.run << std::setw(13) << r.flow_termination << std::setw(10) << r.flow_steps << std::setw(12)
        << std::setprecision(4) << r.flow_seconds << std::setw(15) << r.newton_status << std::setw(7) << r.newton_iterations
        << std::setw(12) << r.newton_seconds << (std::isnan(r.max_du) ? std::string("-") : io::format_double(r.max_du));
    p.line(row.str());
  }
  return kOk;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--mesh", cfg.mesh_path, "Mesh file ('N F' header, then F index triples)")->required();
  sub->add_option("--weights", cfg.weights_path, "Edge weight file ('i j phi' lines, radians); default phi = 0");
  sub->add_option("--radii", cfg.radii, "const:<x> | rand:<seed> | file:<path>");
  sub->add_option("--tol", cfg.tol, "Stopping tolerance on |K - target|_inf");
  sub->add_option("--h0", cfg.h0, "Initial flow step");
  sub->add_option("--tmax", cfg.tmax, "Maximal flow time");
  sub->add_option("--target", cfg.target_path, "Target curvature file (N values); default 0");
  sub->add_option("--out", cfg.out_dir, "Output directory");
  sub->add_flag("--json", cfg.json_output, "Print a JSON document instead of text");
  sub->add_flag("--quiet", cfg.quiet, "Print nothing on stdout");
}

int dispatch(const RunConfig& cfg, std::ostream& out) {
  Printer p(cfg, out);
  if (cfg.subcommand == "check") return cmd_check(cfg, p);
  if (cfg.subcommand == "curvature") return cmd_curvature(cfg, p);
  if (cfg.subcommand == "flow") return cmd_flow(cfg, p);
  if (cfg.subcommand == "solve") return cmd_solve(cfg, p);
  if (cfg.subcommand == "potential") return cmd_potential(cfg, p);
  if (cfg.subcommand == "bench") return cmd_bench(cfg, p);
  throw ParseError("unknown subcommand " + cfg.subcommand);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Hyperbolic circle packings and the combinatorial Calabi flow", "calabi-pack"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "Surface statistics and the combinatorial obstruction report");
  auto* curvature = app.add_subcommand("curvature", "Edge lengths, curvatures and the Gauss-Bonnet residual");
  auto* flow = app.add_subcommand("flow", "Run the (modified) combinatorial Calabi flow");
  auto* solve = app.add_subcommand("solve", "Newton solve for the packing with the target curvature");
  auto* potential = app.add_subcommand("potential", "Evaluate the Ricci potential and probe its properness");
  auto* bench = app.add_subcommand("bench", "Flow vs Newton timing over seeded random initial radii");
  for (auto* sub : {check, curvature, flow, solve, potential, bench}) add_common(sub, cfg);

  curvature->add_option("--laplacian", cfg.laplacian_path, "Write the dual Laplacian as 'row col value' lines");
  flow->add_option("--lambda-every", cfg.lambda_every, "Record lambda1 every n accepted steps (0: final only)");
  potential->add_option("--base", cfg.base, "Base point u0 as a radii spec");
  potential->add_option("--rays", cfg.rays, "Number of probe rays");
  potential->add_option("--radius-max", cfg.radius_max, "Largest probe radius in u-space");
  potential->add_option("--samples", cfg.samples, "Samples per ray");
  potential->add_option("--seed", cfg.seed, "Seed for ray directions");
  bench->add_option("--runs", cfg.runs, "Number of random initial packings");
  bench->add_option("--jobs", cfg.jobs, "Worker threads (default: hardware concurrency)");
  bench->add_option("--seed", cfg.seed, "Seed of the first run; run k uses seed + k");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParse;
  }
  for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  try {
    return dispatch(cfg, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const FileError& e) {
    err << "file error: " << e.what() << '\n';
    return kFile;
  } catch (const InvalidSurface& e) {
    err << "invalid surface: " << e.what() << '\n';
    return kInvalidSurface;
  } catch (const NoConvergence& e) {
    err << "no convergence: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const BlowupGuard& e) {
    err << "blow-up guard: " << e.what() << '\n';
    return kBlowup;
  } catch (const NotPositiveDefinite& e) {
    err << "linear algebra: " << e.what() << '\n';
    return kLinearAlgebra;
  } catch (const ConvergenceFailure& e) {
    err << "linear algebra: " << e.what() << '\n';
    return kLinearAlgebra;
  } catch (const QuadratureFailure& e) {
    err << "quadrature: " << e.what() << '\n';
    return kQuadrature;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

} // namespace calabi::cli
