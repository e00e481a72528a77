#ifndef LOCSUB_MESH_HPP
#define LOCSUB_MESH_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locsub/vec.hpp"

namespace locsub::mesh {

enum class ElementKind { tet, hex };

/// Local faces with outward orientation for positively oriented elements.
/// Tet vertices v0..v3, hex vertices in lexicographic box order
/// (x fastest, then y, then z).
inline constexpr std::array<std::array<int, 3>, 4> kTetFaces = {
    {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};
inline constexpr std::array<std::array<int, 4>, 6> kHexFaces = {
    {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}}};
inline constexpr std::array<std::array<int, 2>, 12> kHexEdges = {{{0, 1},
                                                                  {2, 3},
                                                                  {4, 5},
                                                                  {6, 7},
                                                                  {0, 2},
                                                                  {1, 3},
                                                                  {4, 6},
                                                                  {5, 7},
                                                                  {0, 4},
                                                                  {1, 5},
                                                                  {2, 6},
                                                                  {3, 7}}};

/// Conforming volume mesh with per-element conductivity. Geometry is stored
/// in meters; file and CLI boundaries use millimeters. Immutable after
/// finalize(); queries are safe to call concurrently.
class Mesh {
 public:
  ElementKind kind() const { return kind_; }
  int vertices_per_element() const { return kind_ == ElementKind::tet ? 4 : 8; }
  int faces_per_element() const { return kind_ == ElementKind::tet ? 4 : 6; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_elements() const { return labels_.size(); }

  const Vec3& vertex(int v) const { return vertices_[v]; }
  std::span<const int> element(int e) const {
    int n = vertices_per_element();
    return {connectivity_.data() + static_cast<std::size_t>(e) * n, static_cast<std::size_t>(n)};
  }
  const Mat3& conductivity(int e) const { return conductivity_[e]; }
  int label(int e) const { return labels_[e]; }

  std::span<const int> elements_of_vertex(int v) const;

  Vec3 element_centroid(int e) const;
  double element_volume(int e) const;
  /// Longest element edge.
  double max_edge_length(int e) const;
  std::array<int, 3> face_vertices_tet(int e, int f) const;
  std::array<int, 4> face_vertices_hex(int e, int f) const;
  Vec3 face_centroid(int e, int f) const;
  /// Outward unit normal of local face f.
  Vec3 face_normal(int e, int f) const;
  double face_area(int e, int f) const;
  /// Element across local face f, or -1 on the mesh boundary.
  int face_neighbor(int e, int f) const;

  /// True if x lies in the closed element hull, within tol meters of the
  /// boundary planes.
  bool contains(int e, const Vec3& x, double tol) const;
  /// Signed distance interpretation: > tol means x is strictly interior by
  /// more than tol to every face.
  bool strictly_contains(int e, const Vec3& x, double tol) const;

  /// Id of the lowest-indexed element whose closed hull contains x (within
  /// 1e-12 m), or nullopt. Uses a uniform-grid index.
  std::optional<int> locate_element(const Vec3& x) const;
  /// Linear-scan reference used as the oracle for locate_element.
  std::optional<int> locate_element_brute(const Vec3& x) const;

  /// All (element, local face) pairs on the mesh boundary, ascending.
  const std::vector<std::pair<int, int>>& boundary_faces() const { return boundary_faces_; }
  /// Vertices lying on the mesh boundary, ascending.
  const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }

  double total_volume() const;
  std::map<int, double> volume_by_label() const;

  // --- construction ---
  static Mesh build(ElementKind kind, std::vector<Vec3> vertices_m, std::vector<int> connectivity,
                    std::vector<int> labels, std::vector<Mat3> conductivity);

 private:
  void finalize();

  ElementKind kind_ = ElementKind::tet;
  std::vector<Vec3> vertices_;
  std::vector<int> connectivity_;
  std::vector<int> labels_;
  std::vector<Mat3> conductivity_;

  std::vector<std::int64_t> v2e_offsets_;
  std::vector<int> v2e_data_;
  std::vector<std::pair<int, int>> boundary_faces_;
  std::vector<int> boundary_vertices_;

  // uniform grid for point location
  Vec3 grid_lo_, grid_cell_;
  std::array<int, 3> grid_dims_{1, 1, 1};
  std::vector<std::int64_t> grid_offsets_;
  std::vector<int> grid_data_;
};

struct SphereModel {
  std::array<double, 4> layer_radii_mm{78.0, 80.0, 86.0, 92.0};
  std::array<double, 4> layer_conductivities{0.33, 1.79, 0.01, 0.43};  // S/m
  Vec3 center_mm{0.0, 0.0, 0.0};
};

/// Axis-aligned voxel mesh of the sphere model; each cube labeled by the
/// shell containing its center (labels 1..4).
Mesh generate_voxel_sphere(const SphereModel& model, double h_mm);

/// Split every hex into 6 tets around the v0-v7 diagonal. Face-compatible
/// across neighbors sharing the lexicographic vertex numbering; conductivity
/// and label inherited, volume preserved.
Mesh split_hex_to_tet(const Mesh& mesh);

/// Gmsh ASCII v2.2 reader. Only 4-node tetrahedra are kept as volume
/// elements; points, lines and triangles are skipped as boundary entities.
/// Coordinates are interpreted in mm. Every physical tag must be mapped.
Mesh load_gmsh_ascii(const std::string& path, const std::map<int, Mat3>& tag_conductivity);

/// JSON dump of a mesh (vertices in mm, elements, labels, conductivities).
void save_mesh_json(const Mesh& mesh, const std::string& path);
Mesh load_mesh_json(const std::string& path);

/// d/a with a the longest edge and d the minimum of the distances of x0 to
/// the element corners and face centers.
double distance_edge_ratio(const Mesh& mesh, int element, const Vec3& x0);

}  // namespace locsub::mesh

#endif
