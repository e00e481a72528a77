#include "locsub/dipole_fields.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace locsub::fields {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

void check_not_at_source(const Dipole& d, const Vec3& x) {
  if (norm(x - d.position) <= kSingularityGuard)
    throw std::domain_error("field evaluation at the dipole position");
}

}  // namespace

HomogeneousConductivity::HomogeneousConductivity(const Mat3& sigma) : sigma_(sigma) {
  if (!is_symmetric(sigma, 1e-12 * std::abs(sigma(0, 0)) + 1e-300))
    throw std::invalid_argument("conductivity tensor must be symmetric");
  det_ = det(sigma);
  Mat3 V;
  auto ev = symmetric_eigen(sigma, V);
  for (double e : ev)
    if (!(e > 0.0)) throw std::invalid_argument("conductivity tensor must be positive definite");
  inv_ = locsub::inverse(sigma);
  // inv_sqrt = V diag(1/sqrt(ev)) V^T
  Mat3 D = Mat3::diag(1.0 / std::sqrt(ev[0]), 1.0 / std::sqrt(ev[1]), 1.0 / std::sqrt(ev[2]));
  inv_sqrt_ = V * D * transpose(V);
  double s = sigma(0, 0);
  isotropic_ = std::abs(sigma(1, 1) - s) <= 1e-12 * s && std::abs(sigma(2, 2) - s) <= 1e-12 * s &&
               std::abs(sigma(0, 1)) <= 1e-12 * s && std::abs(sigma(0, 2)) <= 1e-12 * s &&
               std::abs(sigma(1, 2)) <= 1e-12 * s;
}

double HomogeneousConductivity::scalar() const {
  if (!isotropic_) throw std::logic_error("scalar() on anisotropic conductivity");
  return sigma_(0, 0);
}

double u_infinity(const HomogeneousConductivity& cond, const Dipole& dipole, const Vec3& x) {
  check_not_at_source(dipole, x);
  Vec3 r = x - dipole.position;
  Vec3 sir = cond.inverse() * r;
  double q2 = dot(r, sir);  // |sigma^{-1/2} r|^2
  return dot(dipole.moment, sir) / (kFourPi * std::sqrt(cond.determinant()) * q2 * std::sqrt(q2));
}

Vec3 grad_u_infinity(const HomogeneousConductivity& cond, const Dipole& dipole, const Vec3& x) {
  check_not_at_source(dipole, x);
  Vec3 r = x - dipole.position;
  Vec3 sir = cond.inverse() * r;
  Vec3 sim = cond.inverse() * dipole.moment;
  double q2 = dot(r, sir);
  double q3 = q2 * std::sqrt(q2);
  double c = 1.0 / (kFourPi * std::sqrt(cond.determinant()));
  return c * ((1.0 / q3) * sim - (3.0 * dot(dipole.moment, sir) / (q3 * q2)) * sir);
}

Vec3 sigma_grad_u_infinity(const HomogeneousConductivity& cond, const Dipole& dipole,
                           const Vec3& x) {
  check_not_at_source(dipole, x);
  Vec3 r = x - dipole.position;
  Vec3 sir = cond.inverse() * r;
  double q2 = dot(r, sir);
  double q3 = q2 * std::sqrt(q2);
  double c = 1.0 / (kFourPi * std::sqrt(cond.determinant()));
  return c * ((1.0 / q3) * dipole.moment - (3.0 * dot(dipole.moment, sir) / (q3 * q2)) * r);
}

Vec3 primary_B(const Dipole& dipole, const Vec3& x) {
  check_not_at_source(dipole, x);
  Vec3 r = x - dipole.position;
  double rn = norm(r);
  return (kMu0 / kFourPi) * cross(dipole.moment, r) / (rn * rn * rn);
}

}  // namespace locsub::fields
