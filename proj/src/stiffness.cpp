#include "locsub/stiffness.hpp"

#include <algorithm>
#include <stdexcept>

#include "locsub/element_geometry.hpp"
#include "locsub/quadrature.hpp"

namespace locsub::eeg {

using mesh::ElementKind;
using mesh::Mesh;
using solver::CsrMatrix;

namespace {

void element_matrix_tet(const Mesh& m, int e, double ke[8][8]) {
  auto verts = m.element(e);
  geom::TetGeom g({m.vertex(verts[0]), m.vertex(verts[1]), m.vertex(verts[2]), m.vertex(verts[3])});
  if (g.abs_det <= 0.0) throw std::runtime_error("degenerate element Jacobian");
  double volume = g.abs_det / 6.0;
  const Mat3& sigma = m.conductivity(e);
  for (int i = 0; i < 4; ++i) {
    Vec3 sg = sigma * g.grad[i];
    for (int j = 0; j < 4; ++j) ke[i][j] = volume * dot(sg, g.grad[j]);
  }
}

void element_matrix_hex(const Mesh& m, int e, double ke[8][8]) {
  auto verts = m.element(e);
  geom::BoxGeom g(m.vertex(verts[0]), m.vertex(verts[7]));
  if (g.abs_det <= 0.0) throw std::runtime_error("degenerate element Jacobian");
  const Mat3& sigma = m.conductivity(e);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) ke[i][j] = 0.0;
  auto rule = quad::cube_rule(3, 3);
  for (std::size_t q = 0; q < rule->size(); ++q) {
    auto grads = g.basis_grad(rule->points[q]);
    double w = rule->weights[q] * g.abs_det;
    for (int i = 0; i < 8; ++i) {
      Vec3 sg = sigma * grads[i];
      for (int j = i; j < 8; ++j) ke[i][j] += w * dot(sg, grads[j]);
    }
  }
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < i; ++j) ke[i][j] = ke[j][i];
}

}  // namespace

CsrMatrix assemble_stiffness(const Mesh& m) {
  const int n = static_cast<int>(m.num_vertices());
  const int npe = m.vertices_per_element();

  // sparsity pattern: vertex neighborhoods through shared elements
  std::vector<std::int64_t> offsets(n + 1, 0);
  std::vector<int> cols;
  {
    std::vector<int> scratch;
    std::vector<std::vector<int>> rows(n);
    for (int v = 0; v < n; ++v) {
      scratch.clear();
      for (int e : m.elements_of_vertex(v))
        for (int w : m.element(e)) scratch.push_back(w);
      std::sort(scratch.begin(), scratch.end());
      scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
      rows[v] = scratch;
      offsets[v + 1] = offsets[v] + static_cast<std::int64_t>(scratch.size());
    }
    cols.resize(offsets[n]);
    for (int v = 0; v < n; ++v)
      std::copy(rows[v].begin(), rows[v].end(), cols.begin() + offsets[v]);
  }

  std::vector<double> vals(cols.size(), 0.0);
  auto entry = [&](int r, int c) -> double& {
    auto begin = cols.begin() + offsets[r];
    auto end = cols.begin() + offsets[r + 1];
    auto it = std::lower_bound(begin, end, c);
    return vals[it - cols.begin()];
  };

  double ke[8][8];
  for (int e = 0; e < static_cast<int>(m.num_elements()); ++e) {
    if (m.kind() == ElementKind::tet)
      element_matrix_tet(m, e, ke);
    else
      element_matrix_hex(m, e, ke);
    auto verts = m.element(e);
    for (int i = 0; i < npe; ++i)
      for (int j = 0; j < npe; ++j) entry(verts[i], verts[j]) += ke[i][j];
  }
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace locsub::eeg
