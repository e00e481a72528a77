#ifndef LOCSUB_DIPOLE_FIELDS_HPP
#define LOCSUB_DIPOLE_FIELDS_HPP

#include "locsub/vec.hpp"

namespace locsub::fields {

constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;
constexpr double kSingularityGuard = 1e-14;  // meters

struct Dipole {
  Vec3 position;  // m
  Vec3 moment;    // A*m
};

/// Homogeneous conductivity around the source, with the derived quantities
/// the closed-form potential needs.
class HomogeneousConductivity {
 public:
  explicit HomogeneousConductivity(const Mat3& sigma);

  const Mat3& tensor() const { return sigma_; }
  const Mat3& inverse() const { return inv_; }
  const Mat3& inverse_sqrt() const { return inv_sqrt_; }
  double determinant() const { return det_; }
  bool isotropic() const { return isotropic_; }
  /// Scalar value; only valid when isotropic().
  double scalar() const;

 private:
  Mat3 sigma_;
  Mat3 inv_;
  Mat3 inv_sqrt_;
  double det_;
  bool isotropic_;
};

/// Potential of a point dipole in an unbounded homogeneous conductor.
double u_infinity(const HomogeneousConductivity& cond, const Dipole& dipole, const Vec3& x);

Vec3 grad_u_infinity(const HomogeneousConductivity& cond, const Dipole& dipole, const Vec3& x);

/// sigma_inf * grad u_infinity without forming the gradient separately.
Vec3 sigma_grad_u_infinity(const HomogeneousConductivity& cond, const Dipole& dipole,
                           const Vec3& x);

/// Free-space magnetic field of the dipole's primary current.
Vec3 primary_B(const Dipole& dipole, const Vec3& x);

}  // namespace locsub::fields

#endif
