#include "calabi/hyperbolic.h"

#include "calabi/errors.h"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <string>

namespace calabi {
namespace hyperbolic {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kTriangleBand = 1e-14;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite, got " + std::to_string(x));
}

} // namespace

double log_sinh(double x) {
  if (x < 0.0 || std::isnan(x)) throw DomainError("log_sinh of negative argument");
  if (x < 20.0) return std::log(std::sinh(x));
  return x - kLn2 + std::log1p(-std::exp(-2.0 * x));
}

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax - kLn2 + std::log1p(std::exp(-2.0 * ax));
}

double u_from_r(double r) {
  require_positive(r, "radius");
  if (r < 1.0) return std::log(std::tanh(0.5 * r));
  // tanh(r/2) = 1 - 2/(e^r + 1)
  return std::log1p(-2.0 / (std::exp(r) + 1.0));
}

double r_from_u(double u) {
  if (!(u < 0.0)) throw DomainError("u-coordinate must be negative, got " + std::to_string(u));
  const double eu = std::exp(u);
  // 2 artanh(e^u) = ln(1 + e^u) - ln(1 - e^u)
  if (eu < 0.5) return std::log1p(eu) - std::log1p(-eu);
  return std::log1p(eu) - std::log(-std::expm1(u));
}

double edge_length(double ri, double rj, double phi) {
  require_positive(ri, "radius");
  require_positive(rj, "radius");
  if (!(phi >= 0.0 && phi <= std::numbers::pi / 2)) throw DomainError("weight outside [0, pi/2]: " + std::to_string(phi));

  if (phi == 0.0) return ri + rj;
  if (ri + rj > 300.0) {
    // arccosh y = ln(2y) to double precision here.
    return log_cosh(ri) + log_cosh(rj) + std::log1p(std::tanh(ri) * std::tanh(rj) * std::cos(phi)) + kLn2;
  }
  // cosh l - 1, written without the cancellation of cosh(.) - 1.
  const double half = std::sinh(0.5 * (ri + rj));
  const double s = std::sin(0.5 * phi);
  const double x = 2.0 * half * half - 2.0 * std::sinh(ri) * std::sinh(rj) * s * s;
  return std::log1p(x + std::sqrt(x * (x + 2.0)));
}

namespace {

// Half-angle law: tan²(θ_a/2) = sinh(s-b) sinh(s-c) / (sinh s sinh(s-a)).
std::array<double, 3> angles_from_excess(double s, const std::array<double, 3>& excess) {
  const double ls = log_sinh(s);
  const std::array<double, 3> le{log_sinh(excess[0]), log_sinh(excess[1]), log_sinh(excess[2])};
  std::array<double, 3> theta{};
  for (int k = 0; k < 3; ++k) {
    const double log_t = 0.5 * (le[(k + 1) % 3] + le[(k + 2) % 3] - ls - le[k]);
    theta[k] = 2.0 * std::atan(std::exp(log_t));
  }
  return theta;
}

} // namespace

std::array<double, 3> face_angles(double a, double b, double c) {
  require_positive(a, "edge length");
  require_positive(b, "edge length");
  require_positive(c, "edge length");

  const double s = 0.5 * (a + b + c);
  std::array<double, 3> excess{0.5 * (b + c - a), 0.5 * (a + c - b), 0.5 * (a + b - c)};
  for (double& e : excess) {
    if (e < -kTriangleBand * s)
      throw TriangleInequalityViolation("lengths (" + std::to_string(a) + ", " + std::to_string(b) + ", " + std::to_string(c) +
                                        ") violate the triangle inequality");
    e = std::max(e, 0.0);
  }
  return angles_from_excess(s, excess);
}

double edge_defect(double ri, double rj, double phi) {
  if (phi == 0.0) return 0.0;
  const double l = edge_length(ri, rj, phi);
  // cosh(ri + rj) - cosh l = 2 sinh ri sinh rj sin²(phi/2)
  //                        = 2 sinh((ri + rj + l)/2) sinh(δ/2)
  const double log_half = log_sinh(ri) + log_sinh(rj) + 2.0 * std::log(std::sin(0.5 * phi)) - log_sinh(0.5 * (ri + rj + l));
  return 2.0 * std::asinh(std::exp(log_half));
}

PackedTriangle packed_triangle(const std::array<double, 3>& r, const std::array<double, 3>& phi) {
  PackedTriangle t;
  std::array<double, 3> defect{};
  for (int c = 0; c < 3; ++c) {
    const double ri = r[(c + 1) % 3], rj = r[(c + 2) % 3];
    t.lengths[c] = edge_length(ri, rj, phi[c]);
    defect[c] = edge_defect(ri, rj, phi[c]);
  }
  t.semiperimeter = r[0] + r[1] + r[2] - 0.5 * (defect[0] + defect[1] + defect[2]);
  for (int c = 0; c < 3; ++c) {
    // s - l_c = r_c + (δ_c - δ_a - δ_b) / 2: no large lengths cancel.
    t.excess[c] = r[c] + 0.5 * (defect[c] - defect[(c + 1) % 3] - defect[(c + 2) % 3]);
    if (!(t.excess[c] > 0.0))
      throw TriangleInequalityViolation("radii (" + std::to_string(r[0]) + ", " + std::to_string(r[1]) + ", " + std::to_string(r[2]) +
                                        ") give a degenerate triangle");
  }
  t.angles = angles_from_excess(t.semiperimeter, t.excess);
  return t;
}

FaceDerivatives zero_weight_derivatives(const std::array<double, 3>& r) {
  for (double x : r) require_positive(x, "radius");
  FaceDerivatives out;
  const double log_root = 0.5 * (log_sinh(r[0]) + log_sinh(r[1]) + log_sinh(r[2]) - log_sinh(r[0] + r[1] + r[2]));
  const double root = std::exp(log_root);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const double ij = r[i] + r[j], ik = r[i] + r[k];
    out.d[i][j] = std::exp(log_root - log_sinh(ij));
    out.d[i][k] = std::exp(log_root - log_sinh(ik));
    out.d[i][i] = -std::exp(log_root + log_sinh(2 * r[i] + r[j] + r[k]) - log_sinh(ij) - log_sinh(ik));
    // coth(a) - 1/sinh(a) = tanh(a/2)
    out.area_u[i] = root * (std::tanh(0.5 * ij) + std::tanh(0.5 * ik));
  }
  return out;
}

FaceDerivatives chain_rule_derivatives(const std::array<double, 3>& r, const std::array<double, 3>& phi) {
  std::array<double, 3> l{};
  for (int c = 0; c < 3; ++c) l[c] = edge_length(r[(c + 1) % 3], r[(c + 2) % 3], phi[c]);
  const auto theta = face_angles(l[0], l[1], l[2]);

  std::array<double, 3> sh_r{}, ch_r{}, sh_l{};
  for (int k = 0; k < 3; ++k) {
    sh_r[k] = std::sinh(r[k]);
    ch_r[k] = std::cosh(r[k]);
    sh_l[k] = std::sinh(l[k]);
  }

  // dl[c][m] = ∂l_c/∂u_m
  std::array<std::array<double, 3>, 3> dl{};
  for (int c = 0; c < 3; ++c) {
    const int m = (c + 1) % 3, o = (c + 2) % 3;
    const double cp = std::cos(phi[c]);
    dl[c][m] = sh_r[m] * (sh_r[m] * ch_r[o] + ch_r[m] * sh_r[o] * cp) / sh_l[c];
    dl[c][o] = sh_r[o] * (sh_r[o] * ch_r[m] + ch_r[o] * sh_r[m] * cp) / sh_l[c];
  }

  // dtheta[a][c] = ∂θ_a/∂l_c
  std::array<std::array<double, 3>, 3> dtheta{};
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    const double own = sh_l[a] / (sh_l[b] * sh_l[c] * std::sin(theta[a]));
    dtheta[a][a] = own;
    dtheta[a][b] = -own * std::cos(theta[c]);
    dtheta[a][c] = -own * std::cos(theta[b]);
  }

  FaceDerivatives out;
  for (int a = 0; a < 3; ++a)
    for (int m = 0; m < 3; ++m)
      for (int c = 0; c < 3; ++c) out.d[a][m] += dtheta[a][c] * dl[c][m];
  for (int m = 0; m < 3; ++m) out.area_u[m] = -(out.d[0][m] + out.d[1][m] + out.d[2][m]);
  return out;
}

namespace {

// ln(e^x + e^y + ...), with -inf entries allowed.
double log_sum(std::initializer_list<double> terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (std::isinf(m)) return m;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

double log_nonneg(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

} // namespace

// Reduced forms of the chain rule. With sh/ch the sinh/cosh of the corner
// radii, c_k = cos phi_k and Π = sinh s sinh(s-l_a) sinh(s-l_b) sinh(s-l_c):
//   ∂θ_a/∂u_b   = sh_a sh_b Q_ab / (2 √Π sinh² l_c)
//   ∂Area/∂u_a  = sh_a R_a / (4 √Π cosh²(l_b/2) cosh²(l_c/2))
// where Q_ab and R_a are sums of non-negative terms (see below), and the
// diagonal follows from θ_a + θ_b + θ_c = π - Area. No step subtracts.
FaceDerivatives weighted_derivatives(const std::array<double, 3>& r, const std::array<double, 3>& phi) {
  const PackedTriangle tri = packed_triangle(r, phi);
  const auto& l = tri.lengths;
  double log_pi = log_sinh(tri.semiperimeter);
  for (int k = 0; k < 3; ++k) log_pi += log_sinh(tri.excess[k]);
  const double log_root_pi = 0.5 * log_pi;

  std::array<double, 3> ls{}, lc{}, cp{}, sp2{};
  for (int k = 0; k < 3; ++k) {
    ls[k] = log_sinh(r[k]);
    lc[k] = log_cosh(r[k]);
    cp[k] = std::cos(phi[k]);
    const double sn = std::sin(phi[k]);
    sp2[k] = sn * sn;
  }

  FaceDerivatives out;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      const int c = 3 - a - b;
      // Q_ab = sh_b sh_c ch_a (c_a c_c + c_b) + sh_a sh_c ch_b (c_a + c_b c_c) + sh_a sh_b ch_c sin² phi_c
      const double log_q = log_sum({ls[b] + ls[c] + lc[a] + log_nonneg(cp[a] * cp[c] + cp[b]),
                                    ls[a] + ls[c] + lc[b] + log_nonneg(cp[a] + cp[b] * cp[c]),
                                    ls[a] + ls[b] + lc[c] + log_nonneg(sp2[c])});
      out.d[a][b] = std::exp(ls[a] + ls[b] + log_q - kLn2 - log_root_pi - 2.0 * log_sinh(l[c]));
    }
  }
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    const double ca = cp[a], cb = cp[b], cc = cp[c];
    const double lc2a = log_cosh(2.0 * r[a]);
    // R_a, each term a product of non-negative factors.
    const double log_r = log_sum({
        ls[a] + lc[a] + 2 * ls[b] + 2 * ls[c] + std::log1p(ca * cb * cc),
        -kLn2 + ls[a] + 2 * ls[c] + log_sum({lc[a], lc[b]}) + log_nonneg(sp2[b]),
        -kLn2 + ls[a] + 2 * ls[b] + log_sum({lc[a], lc[c]}) + log_nonneg(sp2[c]),
        -kLn2 + ls[b] + 2 * ls[c] + log_sum({lc[b] + lc2a, lc[a]}) + log_nonneg(ca * cb + cc),
        -kLn2 + ls[c] + 2 * ls[b] + log_sum({lc[c] + lc2a, lc[a]}) + log_nonneg(ca * cc + cb),
        -kLn2 + ls[a] + ls[b] + ls[c] + log_sum({kLn2 + lc[a] + lc[b] + lc[c], lc[b], lc[c]}) + log_nonneg(ca + cb * cc),
    });
    out.area_u[a] = std::exp(ls[a] + log_r - 2.0 * kLn2 - log_root_pi - 2.0 * log_cosh(0.5 * l[b]) - 2.0 * log_cosh(0.5 * l[c]));
  }
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    out.d[a][a] = -(out.area_u[a] + out.d[b][a] + out.d[c][a]);
  }
  return out;
}

FaceDerivatives face_derivatives(const std::array<double, 3>& r, const std::array<double, 3>& phi) {
  if (phi[0] == 0.0 && phi[1] == 0.0 && phi[2] == 0.0) return zero_weight_derivatives(r);
  return weighted_derivatives(r, phi);
}

AppendixPredicates appendix_a_predicates(double x, double y, double z) {
  require_positive(x, "x");
  require_positive(y, "y");
  require_positive(z, "z");
  const double cosh1 = std::cosh(1.0);

  // ln sinh t = t + g(t) and ln cosh t = t + h(t). The linear parts cancel
  // exactly in every quotient below, so only the bounded g, h remain.
  auto g = [](double t) { return std::log(-std::expm1(-2.0 * t)) - kLn2; };
  auto h = [](double t) { return std::log1p(std::exp(-2.0 * t)) - kLn2; };

  const double log_root = 0.5 * (g(x) + g(y) + g(z) - g(x + y + z));
  // Decided on the logs: the values themselves underflow to 0 once x + y
  // passes ~700, while the quantities stay strictly positive.
  const double log_over_sinh = log_root - (x + y) - g(x + y);
  const double log_coth = log_root + h(x + y) - g(x + y);
  const double log_full = log_root + g(2 * x + y + z) - g(x + y) - g(x + z);

  AppendixPredicates p{};
  p.value_root = std::exp(log_root);
  p.value_over_sinh = std::exp(log_over_sinh);
  p.value_coth = std::exp(log_coth);
  p.value_full = std::exp(log_full);

  // 1/4 - ratio is proportional to a(1-b) + b(1-c) + c(1-a) with a = e^{-2x},
  // b = e^{-2y}, c = e^{-2z}. The ratio saturates at 1/4 in floating point
  // once min(x, y, z) exceeds ~18, so decide the strict inequality from the
  // log of the largest margin term instead.
  const double la = -2 * x, lb = -2 * y, lc = -2 * z;
  const double margin_log = std::max({la + std::log1p(-std::exp(lb)), lb + std::log1p(-std::exp(lc)), lc + std::log1p(-std::exp(la))});
  // log_root may round onto -ln 2 itself; the margin decides strictness.
  p.root_holds = std::isfinite(log_root) && log_root <= -kLn2 + 1e-15 && std::isfinite(margin_log);

  p.over_sinh_holds = std::isfinite(log_over_sinh) && log_over_sinh < -kLn2;
  p.coth_holds = std::isfinite(log_coth) && log_coth < std::log(0.5 * cosh1);
  p.full_holds = std::isfinite(log_full) && log_full < std::log(cosh1);
  return p;
}

} // namespace hyperbolic

WeightedPacking WeightedPacking::from_radii(WeightAssignment weights, Vector r) {
  WeightedPacking p;
  p.weights_ = std::move(weights);
  p.u_.resize(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) p.u_[i] = hyperbolic::u_from_r(r[i]);
  p.r_ = std::move(r);
  return p;
}

WeightedPacking WeightedPacking::from_u(WeightAssignment weights, Vector u) {
  WeightedPacking p;
  p.weights_ = std::move(weights);
  p.r_.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) p.r_[i] = hyperbolic::r_from_u(u[i]);
  p.u_ = std::move(u);
  return p;
}

double GeometryState::average_curvature(int euler_characteristic) const {
  return (2 * std::numbers::pi * euler_characteristic + total_area) / static_cast<double>(K.size());
}

double GeometryState::gauss_bonnet_residual(int euler_characteristic) const {
  return K.sum() - total_area - 2 * std::numbers::pi * euler_characteristic;
}

namespace {

void check_dimensions(const TriangulatedSurface& surface, const WeightedPacking& packing) {
  if (packing.size() != surface.vertex_count())
    throw DimensionMismatch("packing has " + std::to_string(packing.size()) + " radii, surface has " +
                            std::to_string(surface.vertex_count()) + " vertices");
  if (packing.weights().size() != surface.edge_count()) throw DimensionMismatch("weights do not match surface edges");
}

} // namespace

GeometryState curvatures(const TriangulatedSurface& surface, const WeightedPacking& packing) {
  check_dimensions(surface, packing);
  const Vector& r = packing.r();
  const auto& phi = packing.weights();

  GeometryState g;
  g.lengths.resize(surface.edge_count());
  for (int e = 0; e < surface.edge_count(); ++e) {
    const Edge& ed = surface.edge(e);
    g.lengths[e] = hyperbolic::edge_length(r[ed.a], r[ed.b], phi[e]);
  }

  g.angles.resize(surface.face_count());
  g.face_areas.resize(surface.face_count());
  g.K = Vector::Constant(surface.vertex_count(), 2 * std::numbers::pi);
  for (int f = 0; f < surface.face_count(); ++f) {
    const Face& face = surface.face(f);
    const auto& fe = surface.face_edges(f);
    try {
      g.angles[f] = hyperbolic::packed_triangle({r[face[0]], r[face[1]], r[face[2]]}, {phi[fe[0]], phi[fe[1]], phi[fe[2]]}).angles;
    } catch (const TriangleInequalityViolation& ex) {
      throw TriangleInequalityViolation("face " + std::to_string(f) + ": " + ex.what());
    } catch (const DomainError& ex) {
      throw DomainError("face " + std::to_string(f) + ": " + ex.what());
    }
    const auto& th = g.angles[f];
    g.face_areas[f] = std::numbers::pi - (th[0] + th[1] + th[2]);
    g.total_area += g.face_areas[f];
    for (int c = 0; c < 3; ++c) g.K[surface.face(f)[c]] -= th[c];
  }
  return g;
}

hyperbolic::FaceDerivatives face_derivatives(const TriangulatedSurface& surface, const WeightedPacking& packing, int face) {
  const Face& f = surface.face(face);
  const auto& fe = surface.face_edges(face);
  const std::array<double, 3> r{packing.r()[f[0]], packing.r()[f[1]], packing.r()[f[2]]};
  const std::array<double, 3> phi{packing.weights()[fe[0]], packing.weights()[fe[1]], packing.weights()[fe[2]]};
  return hyperbolic::face_derivatives(r, phi);
}

double dtheta_dr(const TriangulatedSurface& surface, const WeightedPacking& packing, int face, int at_vertex, int wrt_vertex) {
  check_dimensions(surface, packing);
  const int a = surface.corner_of(face, at_vertex);
  const int b = surface.corner_of(face, wrt_vertex);
  if (a < 0 || b < 0) throw DomainError("vertex not on face " + std::to_string(face));
  const auto fd = face_derivatives(surface, packing, face);
  return fd.d[a][b] / std::sinh(packing.r()[wrt_vertex]);
}

} // namespace calabi
