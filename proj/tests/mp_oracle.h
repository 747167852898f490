#pragma once

// 50-digit reference evaluations of the cosine-law geometry, written straight
// from the textbook formulas (arccosh / arccos, no log-space tricks).

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <array>

namespace calabi::testing::mp {

using Real = boost::multiprecision::cpp_bin_float_50;

inline Real pi() { return boost::math::constants::pi<Real>(); }

inline Real acosh(const Real& x) { return log(x + sqrt(x * x - 1)); }

inline Real r_from_u(const Real& u) {
  const Real t = exp(u);
  return log((1 + t) / (1 - t));
}

inline Real edge_length(const Real& ri, const Real& rj, const Real& phi) {
  return acosh(cosh(ri) * cosh(rj) + sinh(ri) * sinh(rj) * cos(phi));
}

// Angle opposite side a.
inline Real angle(const Real& a, const Real& b, const Real& c) {
  return acos((cosh(b) * cosh(c) - cosh(a)) / (sinh(b) * sinh(c)));
}

// Corner angles of the face with corner radii r and opposite-edge weights phi.
inline std::array<Real, 3> face_angles(const std::array<Real, 3>& r, const std::array<Real, 3>& phi) {
  std::array<Real, 3> l;
  for (int c = 0; c < 3; ++c) l[c] = edge_length(r[(c + 1) % 3], r[(c + 2) % 3], phi[c]);
  return {angle(l[0], l[1], l[2]), angle(l[1], l[2], l[0]), angle(l[2], l[0], l[1])};
}

inline Real face_area(const std::array<Real, 3>& r, const std::array<Real, 3>& phi) {
  auto th = face_angles(r, phi);
  return pi() - th[0] - th[1] - th[2];
}

// ∂θ_a/∂u_b and ∂Area/∂u_b by a central difference in u at 50 digits.
struct Derivatives {
  std::array<std::array<double, 3>, 3> d;
  std::array<double, 3> area_u;
};

inline Derivatives face_derivatives(const std::array<double, 3>& r, const std::array<double, 3>& phi) {
  const Real h("1e-16");
  std::array<Real, 3> rr, pp, uu;
  for (int c = 0; c < 3; ++c) {
    rr[c] = r[c];
    pp[c] = phi[c];
    uu[c] = log(tanh(rr[c] / 2));
  }
  Derivatives out{};
  for (int b = 0; b < 3; ++b) {
    auto rp = rr, rm = rr;
    rp[b] = r_from_u(uu[b] + h);
    rm[b] = r_from_u(uu[b] - h);
    auto tp = face_angles(rp, pp), tm = face_angles(rm, pp);
    Real area_p = pi(), area_m = pi();
    for (int a = 0; a < 3; ++a) {
      out.d[a][b] = static_cast<double>((tp[a] - tm[a]) / (2 * h));
      area_p -= tp[a];
      area_m -= tm[a];
    }
    out.area_u[b] = static_cast<double>((area_p - area_m) / (2 * h));
  }
  return out;
}

} // namespace calabi::testing::mp
