#ifndef LOCSUB_FACE_GEOMETRY_HPP
#define LOCSUB_FACE_GEOMETRY_HPP

#include <array>

#include "locsub/dipole_fields.hpp"
#include "locsub/vec.hpp"

namespace locsub::eeg {

/// Per-face geometric quantities for the analytic evaluation of triangle
/// integrals of chi * (x - x0)/|x - x0|^3. The frame (u, v, w) is
/// orthonormal and right-handed with w normal to the face; the source sits
/// at in-plane coordinates (u0, v0) and height -w0.
struct FaceGeometry {
  Vec3 u, v, w;
  std::array<Vec3, 3> s;  // unit edge directions
  std::array<Vec3, 3> m;  // in-plane outward edge normals s_i x w
  std::array<double, 3> gamma;
  double u3, v3, u0, v0, w0;
  std::array<double, 3> t;
  std::array<double, 3> gamma_minus, gamma_plus;
  std::array<double, 3> R;
  std::array<double, 3> R_minus, R_plus;
  std::array<double, 3> f;
  std::array<double, 3> beta_i;
  double beta;
  Vec3 a, b, phi0;  // coefficient vectors of the affine face basis at (u0, v0)

  /// Face moment integrals: M0 = int k dS', Mu = int z1 k, Mv = int z2 k
  /// with k = (x - x0)/|x - x0|^3 over the source-centered face chart.
  Vec3 M0() const;
  Vec3 Mu() const;
  Vec3 Mv() const;

  /// int_F chi (x - x0)/|x-x0|^3 dS for the affine chi with the given vertex
  /// values.
  Vec3 chi_moment(const std::array<double, 3>& chi_values) const;
};

/// All chart quantities for one triangle and source position.
/// Requires x0 at distance > 1e-14 m from the closed triangle.
FaceGeometry face_geometry(const std::array<Vec3, 3>& triangle, const Vec3& x0);

/// Distance from a point to a closed triangle.
double point_triangle_distance(const std::array<Vec3, 3>& tri, const Vec3& x);

/// Analytic transition integrals int_K <sigma grad(chi u_inf), grad phi_i> dV
/// for the four P1 basis functions of a tetrahedron. chi is the affine
/// interpolant of the given vertex values; sigma_inf must be isotropic
/// (scalar); x0 must lie outside the closed tetrahedron.
std::array<double, 4> transition_integral_analytic_tet(const std::array<Vec3, 4>& tet,
                                                       const std::array<double, 4>& chi_values,
                                                       const fields::Dipole& dipole, const Mat3& sigma,
                                                       double sigma_inf);

}  // namespace locsub::eeg

#endif
