#ifndef LOCSUB_RHS_ASSEMBLY_HPP
#define LOCSUB_RHS_ASSEMBLY_HPP

#include <vector>

#include "locsub/dipole_fields.hpp"
#include "locsub/mesh.hpp"
#include "locsub/patch.hpp"
#include "locsub/sparse.hpp"

namespace locsub::eeg {

/// int_K <sigma_c grad u_inf, grad phi_i> dV for all element basis functions.
/// Returns zeros without touching u_inf when sigma_c vanishes.
std::vector<double> patch_term_numeric(const mesh::Mesh& mesh, int element, const Mat3& sigma_c,
                                       const fields::HomogeneousConductivity& sigma_inf,
                                       const fields::Dipole& dipole, int order);

/// int_K <sigma grad(chi u_inf), grad phi_i> dV with chi interpolated from
/// the element's vertex values. x0 must lie outside the element.
std::vector<double> transition_term_numeric(const mesh::Mesh& mesh, int element,
                                            const std::vector<double>& chi_values,
                                            const fields::HomogeneousConductivity& sigma_inf,
                                            const fields::Dipole& dipole, int order);

/// int_F <sigma_inf grad u_inf, eta> phi_i dS over local face f, for the
/// face's vertices (3 for tets, 4 for hexes), with the given oriented
/// normal. x0 must lie off the face plane region.
std::vector<double> surface_term_numeric(const mesh::Mesh& mesh, int element, int local_face,
                                         const Vec3& normal,
                                         const fields::HomogeneousConductivity& sigma_inf,
                                         const fields::Dipole& dipole, int order);

/// Source element for a dipole: the element strictly containing x0 (1e-12 m
/// tolerance). Raises when x0 is outside the mesh or on an element boundary,
/// or when elements within tolerance disagree on the conductivity.
int find_source_element(const mesh::Mesh& mesh, const Vec3& x0);

struct RhsReport {
  int source_element = -1;
  int clamped_patch_orders = 0;  // tet patch integrals with d/a below 1/6
};

/// Localized subtraction right-hand side: transition + surface + patch terms
/// over the given patch. Tetrahedral meshes with isotropic sigma_inf use the
/// analytic transition integral; everything else uses quadrature at the
/// module's recommended orders.
solver::SparseVector assemble_rhs_localized(const mesh::Mesh& mesh, const mesh::Patch& patch,
                                            const fields::Dipole& dipole,
                                            RhsReport* report = nullptr);

/// Classical subtraction right-hand side (chi = 1 on all of the mesh):
/// surface term over the mesh boundary plus patch terms over every element
/// with sigma != sigma_inf.
solver::SparseVector assemble_rhs_full_subtraction(const mesh::Mesh& mesh,
                                                   const fields::Dipole& dipole,
                                                   RhsReport* report = nullptr);

}  // namespace locsub::eeg

#endif
