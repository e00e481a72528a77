#ifndef LOCSUB_MEG_FLUX_HPP
#define LOCSUB_MEG_FLUX_HPP

#include <array>
#include <optional>
#include <vector>

#include "locsub/dipole_fields.hpp"
#include "locsub/mesh.hpp"
#include "locsub/patch.hpp"

namespace locsub::meg {

struct Coil {
  Vec3 position;                         // m, outside the conductor
  std::optional<Vec3> orientation = {};  // unit normal, if the scalar flux is wanted
};

void validate_coils(const mesh::Mesh& mesh, const std::vector<Coil>& coils);

/// Dense per-coil linear functionals L with L * u_c = int sigma grad(u_c) x k dV,
/// k = (x - y)/|x - y|^3, one 3-vector entry per FEM vertex.
class CorrectionLeads {
 public:
  CorrectionLeads(const mesh::Mesh& mesh, const std::vector<Coil>& coils, int order = 2);

  std::size_t num_coils() const { return coils_; }
  Vec3 apply(std::size_t coil, const std::vector<double>& u_c) const;

 private:
  std::size_t coils_ = 0;
  std::size_t vertices_ = 0;
  std::vector<double> data_;  // [coil][component][vertex]
};

/// Streamed evaluation of the same integral without storing lead vectors.
Vec3 correction_field_direct(const mesh::Mesh& mesh, const std::vector<double>& u_c,
                             const Vec3& coil, int order = 2);

Vec3 patch_flux_numeric(const mesh::Mesh& mesh, int element, const Mat3& sigma_c,
                        const fields::HomogeneousConductivity& sigma_inf,
                        const fields::Dipole& dipole, const Vec3& coil, int order);

Vec3 transition_flux_numeric(const mesh::Mesh& mesh, int element,
                             const std::vector<double>& chi_values,
                             const fields::HomogeneousConductivity& sigma_inf,
                             const fields::Dipole& dipole, const Vec3& coil, int order);

Vec3 surface_flux_numeric(const mesh::Mesh& mesh, int element, int local_face, const Vec3& normal,
                          const fields::HomogeneousConductivity& sigma_inf,
                          const fields::Dipole& dipole, const Vec3& coil, int order);

/// Secondary field via the boundary subtraction decomposition:
/// B_S = -mu0/(4pi) * (correction + patch + surface + transition terms).
/// The correction term comes from the supplied leads when given, otherwise
/// from the streamed path. sigma_inf must be isotropic.
Vec3 secondary_field(const mesh::Mesh& mesh, const mesh::Patch& patch,
                     const fields::Dipole& dipole, const std::vector<double>& u_c,
                     const Coil& coil, const CorrectionLeads* leads = nullptr,
                     std::size_t coil_index = 0);

struct TotalField {
  Vec3 field;
  std::optional<double> along_orientation;
};

TotalField total_field(const Vec3& primary, const Vec3& secondary, const Coil& coil);

}  // namespace locsub::meg

#endif
