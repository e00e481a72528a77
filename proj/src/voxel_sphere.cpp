#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "locsub/mesh.hpp"

namespace locsub::mesh {

Mesh generate_voxel_sphere(const SphereModel& model, double h_mm) {
  if (!(h_mm > 0.0)) throw std::invalid_argument("voxel edge length must be positive");
  if (!(h_mm < model.layer_radii_mm[0]))
    throw std::invalid_argument("voxel edge length must be below the innermost radius");
  for (int i = 0; i < 3; ++i)
    if (!(model.layer_radii_mm[i] < model.layer_radii_mm[i + 1]))
      throw std::invalid_argument("sphere radii must be strictly increasing");
  for (double c : model.layer_conductivities)
    if (!(c > 0.0)) throw std::invalid_argument("sphere conductivities must be positive");

  const double R = model.layer_radii_mm[3];
  const int n = static_cast<int>(std::ceil(R / h_mm));  // voxels per half axis

  std::vector<Vec3> vertices;
  std::vector<int> connectivity, labels;
  std::vector<Mat3> conductivity;
  std::unordered_map<std::int64_t, int> vertex_ids;
  const std::int64_t stride = 2 * static_cast<std::int64_t>(n) + 2;

  auto vertex_id = [&](int ix, int iy, int iz) {
    std::int64_t key = (static_cast<std::int64_t>(iz + n) * stride + (iy + n)) * stride + (ix + n);
    auto [it, inserted] = vertex_ids.try_emplace(key, static_cast<int>(vertices.size()));
    if (inserted)
      vertices.push_back(1e-3 * (model.center_mm + Vec3{ix * h_mm, iy * h_mm, iz * h_mm}));
    return it->second;
  };

  for (int iz = -n; iz < n; ++iz)
    for (int iy = -n; iy < n; ++iy)
      for (int ix = -n; ix < n; ++ix) {
        Vec3 c{(ix + 0.5) * h_mm, (iy + 0.5) * h_mm, (iz + 0.5) * h_mm};
        double r = norm(c);
        if (r >= R) continue;
        int label = 4;
        for (int l = 0; l < 4; ++l) {
          if (r < model.layer_radii_mm[l]) {
            label = l + 1;
            break;
          }
        }
        for (int dz = 0; dz <= 1; ++dz)
          for (int dy = 0; dy <= 1; ++dy)
            for (int dx = 0; dx <= 1; ++dx)
              connectivity.push_back(vertex_id(ix + dx, iy + dy, iz + dz));
        labels.push_back(label);
        conductivity.push_back(Mat3::identity(model.layer_conductivities[label - 1]));
      }

  if (labels.empty()) throw std::invalid_argument("voxel size too large: no voxel center inside");
  return Mesh::build(ElementKind::hex, std::move(vertices), std::move(connectivity),
                     std::move(labels), std::move(conductivity));
}

Mesh split_hex_to_tet(const Mesh& mesh) {
  if (mesh.kind() != ElementKind::tet && mesh.kind() != ElementKind::hex)
    throw std::invalid_argument("unknown element kind");
  if (mesh.kind() == ElementKind::tet)
    throw std::invalid_argument("split_hex_to_tet: mesh is already tetrahedral");

  // Freudenthal decomposition around the v0-v7 diagonal; positively oriented.
  static constexpr std::array<std::array<int, 4>, 6> kSplit = {
      {{0, 1, 3, 7}, {0, 1, 7, 5}, {0, 2, 7, 3}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 7, 6}}};

  std::vector<Vec3> vertices(mesh.num_vertices());
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) vertices[v] = mesh.vertex(v);

  std::vector<int> connectivity, labels;
  std::vector<Mat3> conductivity;
  connectivity.reserve(mesh.num_elements() * 24);
  labels.reserve(mesh.num_elements() * 6);
  conductivity.reserve(mesh.num_elements() * 6);
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
    auto verts = mesh.element(e);
    for (const auto& tet : kSplit) {
      for (int i : tet) connectivity.push_back(verts[i]);
      labels.push_back(mesh.label(e));
      conductivity.push_back(mesh.conductivity(e));
    }
  }
  return Mesh::build(ElementKind::tet, std::move(vertices), std::move(connectivity),
                     std::move(labels), std::move(conductivity));
}

}  // namespace locsub::mesh
