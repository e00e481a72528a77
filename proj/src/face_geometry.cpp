#include "locsub/face_geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "locsub/element_geometry.hpp"

namespace locsub::eeg {

namespace {

constexpr double kFaceTol = 1e-14;  // meters

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double point_triangle_distance(const std::array<Vec3, 3>& tri, const Vec3& x) {
  Vec3 e0 = tri[1] - tri[0], e1 = tri[2] - tri[0], d = tri[0] - x;
  double a = dot(e0, e0), b = dot(e0, e1), c = dot(e1, e1);
  double d0 = dot(e0, d), d1 = dot(e1, d);
  double det = a * c - b * b;
  double s = b * d1 - c * d0, t = b * d0 - a * d1;
  if (s + t <= det) {
    if (s < 0.0) {
      if (t < 0.0) {  // near vertex 0
        s = std::clamp(-d0 / a, 0.0, 1.0);
        t = 0.0;
        if (d1 < 0.0 && -d1 <= c) {
          t = std::clamp(-d1 / c, 0.0, 1.0);
          s = 0.0;
        }
      } else {
        s = 0.0;
        t = std::clamp(-d1 / c, 0.0, 1.0);
      }
    } else if (t < 0.0) {
      t = 0.0;
      s = std::clamp(-d0 / a, 0.0, 1.0);
    } else {
      s /= det;
      t /= det;
    }
  } else {
    if (s < 0.0) {
      double tmp0 = b + d0, tmp1 = c + d1;
      if (tmp1 > tmp0) {
        s = std::clamp((tmp1 - tmp0) / (a - 2.0 * b + c), 0.0, 1.0);
        t = 1.0 - s;
      } else {
        s = 0.0;
        t = std::clamp(-d1 / c, 0.0, 1.0);
      }
    } else if (t < 0.0) {
      double tmp0 = b + d1, tmp1 = a + d0;
      if (tmp1 > tmp0) {
        t = std::clamp((tmp1 - tmp0) / (a - 2.0 * b + c), 0.0, 1.0);
        s = 1.0 - t;
      } else {
        t = 0.0;
        s = std::clamp(-d0 / a, 0.0, 1.0);
      }
    } else {
      double num = c + d1 - b - d0;
      s = std::clamp(num / (a - 2.0 * b + c), 0.0, 1.0);
      t = 1.0 - s;
    }
  }
  return norm(tri[0] + s * e0 + t * e1 - x);
}

FaceGeometry face_geometry(const std::array<Vec3, 3>& tri, const Vec3& x0) {
  if (point_triangle_distance(tri, x0) <= kFaceTol)
    throw std::domain_error("source position lies on the triangle");

  const Vec3 &p1 = tri[0], &p2 = tri[1], &p3 = tri[2];
  FaceGeometry fg;
  fg.gamma[0] = norm(p3 - p2);
  fg.gamma[1] = norm(p1 - p3);
  fg.gamma[2] = norm(p2 - p1);
  fg.s[0] = (p3 - p2) / fg.gamma[0];
  fg.s[1] = (p1 - p3) / fg.gamma[1];
  fg.s[2] = (p2 - p1) / fg.gamma[2];
  fg.u = fg.s[2];
  fg.w = normalized(cross(fg.s[0], fg.s[1]));
  fg.v = cross(fg.w, fg.u);
  for (int i = 0; i < 3; ++i) fg.m[i] = cross(fg.s[i], fg.w);

  fg.u3 = dot(fg.u, p3 - p1);
  fg.v3 = dot(fg.v, p3 - p1);
  fg.u0 = dot(fg.u, x0 - p1);
  fg.v0 = dot(fg.v, x0 - p1);
  fg.w0 = -dot(fg.w, x0 - p1);

  const double u3 = fg.u3, v3 = fg.v3, u0 = fg.u0, v0 = fg.v0, g3 = fg.gamma[2];
  fg.t[0] = (v0 * (u3 - g3) + v3 * (g3 - u0)) / fg.gamma[0];
  fg.t[1] = (u0 * v3 - v0 * u3) / fg.gamma[1];
  fg.t[2] = v0;

  fg.gamma_minus[0] = -((g3 - u0) * (g3 - u3) + v0 * v3) / fg.gamma[0];
  fg.gamma_plus[0] = ((u3 - u0) * (u3 - g3) + v3 * (v3 - v0)) / fg.gamma[0];
  fg.gamma_minus[1] = -(u3 * (u3 - u0) + v3 * (v3 - v0)) / fg.gamma[1];
  fg.gamma_plus[1] = (u0 * u3 + v0 * v3) / fg.gamma[1];
  fg.gamma_minus[2] = -u0;
  fg.gamma_plus[2] = g3 - u0;

  fg.beta = 0.0;
  for (int i = 0; i < 3; ++i) {
    double ti2 = fg.t[i] * fg.t[i];
    fg.R[i] = std::sqrt(ti2 + fg.w0 * fg.w0);
    fg.R_minus[i] = std::sqrt(ti2 + fg.w0 * fg.w0 + fg.gamma_minus[i] * fg.gamma_minus[i]);
    fg.R_plus[i] = std::sqrt(ti2 + fg.w0 * fg.w0 + fg.gamma_plus[i] * fg.gamma_plus[i]);
    // stable two-branch edge integral of 1/R
    if (fg.gamma_minus[i] >= 0.0)
      fg.f[i] = std::log((fg.R_plus[i] + fg.gamma_plus[i]) / (fg.R_minus[i] + fg.gamma_minus[i]));
    else
      fg.f[i] = std::log((fg.R_minus[i] - fg.gamma_minus[i]) / (fg.R_plus[i] - fg.gamma_plus[i]));
    if (fg.R[i] == 0.0) {
      fg.beta_i[i] = 0.0;  // source on the edge line, outside the segment
    } else {
      double aw = std::abs(fg.w0);
      fg.beta_i[i] =
          std::atan(fg.t[i] * fg.gamma_plus[i] / (fg.R[i] * fg.R[i] + aw * fg.R_plus[i])) -
          std::atan(fg.t[i] * fg.gamma_minus[i] / (fg.R[i] * fg.R[i] + aw * fg.R_minus[i]));
    }
    fg.beta += fg.beta_i[i];
  }

  fg.a = Vec3{-1.0 / g3, 1.0 / g3, 0.0};
  fg.b = Vec3{(u3 / g3 - 1.0) / v3, -u3 / (g3 * v3), 1.0 / v3};
  fg.phi0 = Vec3{1.0, 0.0, 0.0} + u0 * fg.a + v0 * fg.b;
  return fg;
}

Vec3 FaceGeometry::M0() const {
  Vec3 r = sign0(w0) * beta * w;
  for (int i = 0; i < 3; ++i) r -= f[i] * m[i];
  return r;
}

namespace {

Vec3 first_moment(const FaceGeometry& fg, const Vec3& dir) {
  Vec3 r{};
  double fm = 0.0;
  for (int i = 0; i < 3; ++i) {
    double ds = dot(dir, fg.s[i]);
    r += ds * (fg.f[i] * fg.t[i] * fg.s[i] - (fg.R_plus[i] - fg.R_minus[i]) * fg.m[i]);
    fm += dot(dir, fg.m[i]) * fg.f[i];
  }
  r -= std::abs(fg.w0) * fg.beta * dir;
  r -= fm * fg.w0 * fg.w;
  return r;
}

}  // namespace

Vec3 FaceGeometry::Mu() const { return first_moment(*this, u); }
Vec3 FaceGeometry::Mv() const { return first_moment(*this, v); }

Vec3 FaceGeometry::chi_moment(const std::array<double, 3>& c) const {
  Vec3 cv{c[0], c[1], c[2]};
  return dot(phi0, cv) * M0() + dot(a, cv) * Mu() + dot(b, cv) * Mv();
}

std::array<double, 4> transition_integral_analytic_tet(const std::array<Vec3, 4>& tet,
                                                       const std::array<double, 4>& chi_values,
                                                       const fields::Dipole& dipole,
                                                       const Mat3& sigma, double sigma_inf) {
  if (!(sigma_inf > 0.0)) throw std::invalid_argument("sigma_inf must be positive");

  geom::TetGeom g(tet);
  if (g.abs_det <= 0.0) throw std::invalid_argument("degenerate tetrahedron");
  {
    // inside test via the outward face planes
    bool inside = true;
    for (const auto& lf : mesh::kTetFaces) {
      Vec3 n = normalized(cross(tet[lf[1]] - tet[lf[0]], tet[lf[2]] - tet[lf[0]]));
      if (dot(dipole.position - tet[lf[0]], n) > kFaceTol) {
        inside = false;
        break;
      }
    }
    if (inside) throw std::domain_error("source position inside or on the tetrahedron");
  }

  Vec3 moment_sum{};
  for (int fidx = 0; fidx < 4; ++fidx) {
    const auto& lf = mesh::kTetFaces[fidx];
    std::array<Vec3, 3> face = {tet[lf[0]], tet[lf[1]], tet[lf[2]]};
    std::array<double, 3> c = {chi_values[lf[0]], chi_values[lf[1]], chi_values[lf[2]]};
    Vec3 eta = normalized(cross(face[1] - face[0], face[2] - face[0]));  // outward by ordering
    FaceGeometry fg = face_geometry(face, dipole.position);
    moment_sum += dot(fg.chi_moment(c), dipole.moment) * eta;
  }
  moment_sum *= 1.0 / (4.0 * std::numbers::pi * sigma_inf);

  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = dot(sigma * g.grad[i], moment_sum);
  return out;
}

}  // namespace locsub::eeg
