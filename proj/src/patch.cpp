#include "locsub/patch.hpp"

#include <algorithm>
#include <stdexcept>

namespace locsub::mesh {

namespace {
constexpr double kBoundaryTol = 1e-12;  // meters
}

bool Patch::in_patch(int element) const {
  return std::binary_search(patch_elements.begin(), patch_elements.end(), element);
}

std::vector<int> vertex_extension(const Mesh& mesh, const std::vector<int>& elements) {
  for (int e : elements)
    if (e < 0 || e >= static_cast<int>(mesh.num_elements()))
      throw std::invalid_argument("vertex_extension: element id out of range");
  std::vector<char> mark(mesh.num_elements(), 0);
  for (int e : elements) mark[e] = 1;
  std::vector<int> out(elements);
  for (int e : elements)
    for (int v : mesh.element(e))
      for (int n : mesh.elements_of_vertex(v))
        if (!mark[n]) {
          mark[n] = 1;
          out.push_back(n);
        }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Patch build_patch(const Mesh& mesh, const Vec3& x0, int n_extensions) {
  if (n_extensions < 0) throw std::invalid_argument("n_extensions must be >= 0");

  auto located = mesh.locate_element(x0);
  if (!located) throw std::invalid_argument("dipole position lies outside the mesh");
  int src = *located;
  if (!mesh.strictly_contains(src, x0, kBoundaryTol))
    throw std::invalid_argument("dipole position lies on an element boundary");

  Patch patch;
  patch.source_element = src;
  patch.patch_elements = {src};
  for (int i = 0; i < n_extensions; ++i) {
    auto next = vertex_extension(mesh, patch.patch_elements);
    if (next.size() == patch.patch_elements.size()) break;  // mesh exhausted
    patch.patch_elements = std::move(next);
  }
  auto extended = vertex_extension(mesh, patch.patch_elements);
  patch.transition_elements.clear();
  std::set_difference(extended.begin(), extended.end(), patch.patch_elements.begin(),
                      patch.patch_elements.end(), std::back_inserter(patch.transition_elements));

  for (int e : patch.patch_elements)
    for (int v : mesh.element(e)) patch.chi_vertex_values[v] = 1.0;
  for (int e : patch.transition_elements)
    for (int v : mesh.element(e)) patch.chi_vertex_values.try_emplace(v, 0.0);

  for (int e : patch.patch_elements)
    for (int f = 0; f < mesh.faces_per_element(); ++f) {
      int neighbor = mesh.face_neighbor(e, f);
      if (neighbor >= 0 && patch.in_patch(neighbor)) continue;
      patch.boundary_faces.push_back({e, f, mesh.face_normal(e, f)});
    }
  return patch;
}

}  // namespace locsub::mesh
