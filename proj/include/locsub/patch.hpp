#ifndef LOCSUB_PATCH_HPP
#define LOCSUB_PATCH_HPP

#include <unordered_map>
#include <vector>

#include "locsub/mesh.hpp"

namespace locsub::mesh {

struct BoundaryFace {
  int element;     // patch element owning the face
  int local_face;  // local face id within that element
  Vec3 normal;     // unit normal pointing out of the patch
};

/// Dipole-centered patch: element sets, oriented patch boundary and the
/// vertex coefficients of the cutoff function chi (1 on patch vertices,
/// 0 on every other vertex).
struct Patch {
  std::vector<int> patch_elements;       // sorted
  std::vector<int> transition_elements;  // sorted
  std::vector<BoundaryFace> boundary_faces;
  std::unordered_map<int, double> chi_vertex_values;
  int source_element = -1;

  double chi(int vertex) const {
    auto it = chi_vertex_values.find(vertex);
    return it == chi_vertex_values.end() ? 0.0 : it->second;
  }
  bool in_patch(int element) const;
};

/// All elements sharing at least one vertex with the given set (a superset
/// of the input). Input and output are sorted element-id vectors.
std::vector<int> vertex_extension(const Mesh& mesh, const std::vector<int>& elements);

/// Patch from n vertex extensions of the element strictly containing x0,
/// plus one further extension as the transition region. Two extensions are
/// the recommended default.
Patch build_patch(const Mesh& mesh, const Vec3& x0, int n_extensions = 2);

}  // namespace locsub::mesh

#endif
