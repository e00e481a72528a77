#ifndef LOCSUB_ELEMENT_GEOMETRY_HPP
#define LOCSUB_ELEMENT_GEOMETRY_HPP

#include <array>

#include "locsub/mesh.hpp"

namespace locsub::geom {

/// Affine geometry of a tetrahedron with the P1 nodal basis.
struct TetGeom {
  std::array<Vec3, 4> p;
  std::array<Vec3, 4> grad;  // constant physical basis gradients
  double abs_det = 0.0;      // |det J| = 6 * volume

  explicit TetGeom(const std::array<Vec3, 4>& pts) : p(pts) {
    Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0], e3 = p[3] - p[0];
    Mat3 J;
    for (int i = 0; i < 3; ++i) {
      J(i, 0) = e1[i];
      J(i, 1) = e2[i];
      J(i, 2) = e3[i];
    }
    double d = det(J);
    abs_det = std::abs(d);
    Mat3 JinvT = transpose(inverse(J));
    grad[1] = JinvT * Vec3{1, 0, 0};
    grad[2] = JinvT * Vec3{0, 1, 0};
    grad[3] = JinvT * Vec3{0, 0, 1};
    grad[0] = -1.0 * (grad[1] + grad[2] + grad[3]);
  }

  Vec3 map(const Vec3& ref) const {
    return p[0] + ref.x * (p[1] - p[0]) + ref.y * (p[2] - p[0]) + ref.z * (p[3] - p[0]);
  }

  static std::array<double, 4> basis(const Vec3& ref) {
    return {1.0 - ref.x - ref.y - ref.z, ref.x, ref.y, ref.z};
  }
};

/// Axis-aligned box with the trilinear nodal basis in lexicographic order.
struct BoxGeom {
  Vec3 lo, hi, size;
  double abs_det = 0.0;

  BoxGeom(const Vec3& lo_, const Vec3& hi_) : lo(lo_), hi(hi_), size(hi_ - lo_) {
    abs_det = size.x * size.y * size.z;
  }

  Vec3 map(const Vec3& ref) const {
    return {lo.x + ref.x * size.x, lo.y + ref.y * size.y, lo.z + ref.z * size.z};
  }

  static constexpr std::array<std::array<int, 3>, 8> kBits = {
      {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}}};

  std::array<double, 8> basis(const Vec3& ref) const {
    std::array<double, 8> out{};
    double fx[2] = {1.0 - ref.x, ref.x};
    double fy[2] = {1.0 - ref.y, ref.y};
    double fz[2] = {1.0 - ref.z, ref.z};
    for (int i = 0; i < 8; ++i) out[i] = fx[kBits[i][0]] * fy[kBits[i][1]] * fz[kBits[i][2]];
    return out;
  }

  std::array<Vec3, 8> basis_grad(const Vec3& ref) const {
    std::array<Vec3, 8> out{};
    double fx[2] = {1.0 - ref.x, ref.x};
    double fy[2] = {1.0 - ref.y, ref.y};
    double fz[2] = {1.0 - ref.z, ref.z};
    double dx[2] = {-1.0 / size.x, 1.0 / size.x};
    double dy[2] = {-1.0 / size.y, 1.0 / size.y};
    double dz[2] = {-1.0 / size.z, 1.0 / size.z};
    for (int i = 0; i < 8; ++i) {
      int bx = kBits[i][0], by = kBits[i][1], bz = kBits[i][2];
      out[i] = {dx[bx] * fy[by] * fz[bz], fx[bx] * dy[by] * fz[bz], fx[bx] * fy[by] * dz[bz]};
    }
    return out;
  }
};

/// Triangle face with its own affine trace basis (vertex order as stored).
struct TriFace {
  std::array<Vec3, 3> p;
  double area_factor;  // |(b-a) x (c-a)|, i.e. 2*area

  explicit TriFace(const std::array<Vec3, 3>& pts)
      : p(pts), area_factor(norm(cross(p[1] - p[0], p[2] - p[0]))) {}

  Vec3 map(double s, double t) const { return p[0] + s * (p[1] - p[0]) + t * (p[2] - p[0]); }
  static std::array<double, 3> basis(double s, double t) { return {1.0 - s - t, s, t}; }
};

/// Planar parallelogram face (box faces) with the bilinear trace basis on the
/// loop (a, b, c, d), c opposite a.
struct QuadFace {
  std::array<Vec3, 4> p;
  double area_factor;  // |(b-a) x (d-a)|

  explicit QuadFace(const std::array<Vec3, 4>& pts)
      : p(pts), area_factor(norm(cross(p[1] - p[0], p[3] - p[0]))) {}

  Vec3 map(double s, double t) const { return p[0] + s * (p[1] - p[0]) + t * (p[3] - p[0]); }
  static std::array<double, 4> basis(double s, double t) {
    return {(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t};
  }
};

}  // namespace locsub::geom

#endif
