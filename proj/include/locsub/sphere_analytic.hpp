#ifndef LOCSUB_SPHERE_ANALYTIC_HPP
#define LOCSUB_SPHERE_ANALYTIC_HPP

#include <string>
#include <vector>

#include "locsub/dipole_fields.hpp"
#include "locsub/meg_flux.hpp"
#include "locsub/mesh.hpp"

namespace locsub::analytic {

struct EegSeriesResult {
  std::vector<double> potentials;  // V, one per evaluation point
  bool converged = true;
  int terms = 0;
};

/// Multilayer-sphere EEG potential: Legendre series with per-layer radial
/// coefficients propagated by 2x2 layer-transfer recurrences. The series is
/// truncated when the term-to-partial-sum ratio drops below 1e-10, or at
/// 1000 terms (converged=false when the final ratio still exceeds 1e-6).
/// Points may lie in any layer outside the dipole radius; radii beyond the
/// outer surface are clamped onto it.
EegSeriesResult sphere_eeg_analytic(const mesh::SphereModel& model, const fields::Dipole& dipole,
                                    const std::vector<Vec3>& points_m);

/// Total magnetic field of a dipole in a spherically symmetric conductor
/// (closed form; independent of the conductivity profile).
Vec3 sphere_meg_analytic(const fields::Dipole& dipole, const Vec3& center_m, const Vec3& coil_m);

std::vector<Vec3> sphere_meg_analytic(const fields::Dipole& dipole, const Vec3& center_m,
                                      const std::vector<meg::Coil>& coils);

/// Deterministic Fibonacci-lattice points on a sphere.
std::vector<Vec3> fibonacci_points(int n, double radius, const Vec3& center = {});

struct SensorLayout {
  std::vector<Vec3> electrodes_m;  // on the outer sphere surface
  std::vector<meg::Coil> coils;    // radially oriented

  static SensorLayout for_sphere(const mesh::SphereModel& model, int n_electrodes, int n_coils,
                                 double coil_radius_mm = 110.0);
};

/// Points as a JSON array of [x, y, z] in mm; coils optionally carry normals
/// as [x, y, z, nx, ny, nz].
std::vector<Vec3> load_points_json(const std::string& path);
void save_points_json(const std::vector<Vec3>& points_m, const std::string& path);

}  // namespace locsub::analytic

#endif
