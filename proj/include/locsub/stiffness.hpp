#ifndef LOCSUB_STIFFNESS_HPP
#define LOCSUB_STIFFNESS_HPP

#include "locsub/mesh.hpp"
#include "locsub/sparse.hpp"

namespace locsub::eeg {

/// FEM stiffness matrix of the bilinear form int <sigma grad w, grad v> dV
/// with P1 (tet) or Q1 (hex) nodal bases. Symmetric positive semidefinite;
/// row sums vanish.
solver::CsrMatrix assemble_stiffness(const mesh::Mesh& mesh);

}  // namespace locsub::eeg

#endif
