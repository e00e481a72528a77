#include "locsub/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace locsub::mesh {

namespace {

constexpr double kContainTol = 1e-12;  // meters

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(cross(b - a, c - a), d - a) / 6.0;
}

}  // namespace

std::span<const int> Mesh::elements_of_vertex(int v) const {
  auto begin = v2e_offsets_[v];
  auto end = v2e_offsets_[v + 1];
  return {v2e_data_.data() + begin, static_cast<std::size_t>(end - begin)};
}

Vec3 Mesh::element_centroid(int e) const {
  Vec3 c{};
  auto verts = element(e);
  for (int v : verts) c += vertices_[v];
  return c / static_cast<double>(verts.size());
}

double Mesh::element_volume(int e) const {
  auto verts = element(e);
  if (kind_ == ElementKind::tet)
    return tet_signed_volume(vertices_[verts[0]], vertices_[verts[1]], vertices_[verts[2]],
                             vertices_[verts[3]]);
  Vec3 d = vertices_[verts[7]] - vertices_[verts[0]];
  return d.x * d.y * d.z;
}

double Mesh::max_edge_length(int e) const {
  auto verts = element(e);
  double best = 0.0;
  if (kind_ == ElementKind::tet) {
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        best = std::max(best, norm(vertices_[verts[i]] - vertices_[verts[j]]));
  } else {
    for (const auto& edge : kHexEdges)
      best = std::max(best, norm(vertices_[verts[edge[0]]] - vertices_[verts[edge[1]]]));
  }
  return best;
}

std::array<int, 3> Mesh::face_vertices_tet(int e, int f) const {
  auto verts = element(e);
  const auto& lf = kTetFaces[f];
  return {verts[lf[0]], verts[lf[1]], verts[lf[2]]};
}

std::array<int, 4> Mesh::face_vertices_hex(int e, int f) const {
  auto verts = element(e);
  const auto& lf = kHexFaces[f];
  return {verts[lf[0]], verts[lf[1]], verts[lf[2]], verts[lf[3]]};
}

Vec3 Mesh::face_centroid(int e, int f) const {
  Vec3 c{};
  if (kind_ == ElementKind::tet) {
    auto fv = face_vertices_tet(e, f);
    for (int v : fv) c += vertices_[v];
    return c / 3.0;
  }
  auto fv = face_vertices_hex(e, f);
  for (int v : fv) c += vertices_[v];
  return c / 4.0;
}

Vec3 Mesh::face_normal(int e, int f) const {
  if (kind_ == ElementKind::tet) {
    auto fv = face_vertices_tet(e, f);
    return normalized(cross(vertices_[fv[1]] - vertices_[fv[0]], vertices_[fv[2]] - vertices_[fv[0]]));
  }
  auto fv = face_vertices_hex(e, f);
  return normalized(cross(vertices_[fv[1]] - vertices_[fv[0]], vertices_[fv[3]] - vertices_[fv[0]]));
}

double Mesh::face_area(int e, int f) const {
  if (kind_ == ElementKind::tet) {
    auto fv = face_vertices_tet(e, f);
    return 0.5 * norm(cross(vertices_[fv[1]] - vertices_[fv[0]], vertices_[fv[2]] - vertices_[fv[0]]));
  }
  auto fv = face_vertices_hex(e, f);
  return norm(cross(vertices_[fv[1]] - vertices_[fv[0]], vertices_[fv[3]] - vertices_[fv[0]]));
}

int Mesh::face_neighbor(int e, int f) const {
  auto verts = element(e);
  int n_face = kind_ == ElementKind::tet ? 3 : 4;
  std::array<int, 4> fv{};
  for (int i = 0; i < n_face; ++i)
    fv[i] = kind_ == ElementKind::tet ? verts[kTetFaces[f][i]] : verts[kHexFaces[f][i]];
  for (int cand : elements_of_vertex(fv[0])) {
    if (cand == e) continue;
    auto cv = element(cand);
    bool all = true;
    for (int i = 1; i < n_face; ++i) {
      if (std::find(cv.begin(), cv.end(), fv[i]) == cv.end()) {
        all = false;
        break;
      }
    }
    if (all) return cand;
  }
  return -1;
}

bool Mesh::contains(int e, const Vec3& x, double tol) const {
  auto verts = element(e);
  if (kind_ == ElementKind::hex) {
    const Vec3& lo = vertices_[verts[0]];
    const Vec3& hi = vertices_[verts[7]];
    return x.x >= lo.x - tol && x.x <= hi.x + tol && x.y >= lo.y - tol && x.y <= hi.y + tol &&
           x.z >= lo.z - tol && x.z <= hi.z + tol;
  }
  for (int f = 0; f < 4; ++f) {
    auto fv = face_vertices_tet(e, f);
    Vec3 n = normalized(cross(vertices_[fv[1]] - vertices_[fv[0]], vertices_[fv[2]] - vertices_[fv[0]]));
    if (dot(x - vertices_[fv[0]], n) > tol) return false;
  }
  return true;
}

bool Mesh::strictly_contains(int e, const Vec3& x, double tol) const {
  auto verts = element(e);
  if (kind_ == ElementKind::hex) {
    const Vec3& lo = vertices_[verts[0]];
    const Vec3& hi = vertices_[verts[7]];
    return x.x > lo.x + tol && x.x < hi.x - tol && x.y > lo.y + tol && x.y < hi.y - tol &&
           x.z > lo.z + tol && x.z < hi.z - tol;
  }
  for (int f = 0; f < 4; ++f) {
    auto fv = face_vertices_tet(e, f);
    Vec3 n = normalized(cross(vertices_[fv[1]] - vertices_[fv[0]], vertices_[fv[2]] - vertices_[fv[0]]));
    if (dot(x - vertices_[fv[0]], n) > -tol) return false;
  }
  return true;
}

std::optional<int> Mesh::locate_element(const Vec3& x) const {
  std::array<int, 3> cell{};
  for (int a = 0; a < 3; ++a) {
    double t = (x[a] - grid_lo_[a]) / grid_cell_[a];
    int c = static_cast<int>(std::floor(t));
    if (c < -1 || c > grid_dims_[a]) return std::nullopt;
    cell[a] = std::clamp(c, 0, grid_dims_[a] - 1);
  }
  std::int64_t idx =
      (static_cast<std::int64_t>(cell[2]) * grid_dims_[1] + cell[1]) * grid_dims_[0] + cell[0];
  int found = -1;
  for (auto i = grid_offsets_[idx]; i < grid_offsets_[idx + 1]; ++i) {
    int e = grid_data_[i];
    if ((found < 0 || e < found) && contains(e, x, kContainTol)) found = e;
  }
  if (found < 0) return std::nullopt;
  return found;
}

std::optional<int> Mesh::locate_element_brute(const Vec3& x) const {
  for (int e = 0; e < static_cast<int>(num_elements()); ++e)
    if (contains(e, x, kContainTol)) return e;
  return std::nullopt;
}

double Mesh::total_volume() const {
  double v = 0.0;
  for (int e = 0; e < static_cast<int>(num_elements()); ++e) v += element_volume(e);
  return v;
}

std::map<int, double> Mesh::volume_by_label() const {
  std::map<int, double> out;
  for (int e = 0; e < static_cast<int>(num_elements()); ++e) out[labels_[e]] += element_volume(e);
  return out;
}

Mesh Mesh::build(ElementKind kind, std::vector<Vec3> vertices_m, std::vector<int> connectivity,
                 std::vector<int> labels, std::vector<Mat3> conductivity) {
  Mesh m;
  m.kind_ = kind;
  m.vertices_ = std::move(vertices_m);
  m.connectivity_ = std::move(connectivity);
  m.labels_ = std::move(labels);
  m.conductivity_ = std::move(conductivity);
  int n = m.vertices_per_element();
  if (m.connectivity_.size() != m.labels_.size() * static_cast<std::size_t>(n) ||
      m.labels_.size() != m.conductivity_.size())
    throw std::invalid_argument("mesh arrays have inconsistent sizes");
  m.finalize();
  return m;
}

void Mesh::finalize() {
  const int nv = static_cast<int>(vertices_.size());
  const int ne = static_cast<int>(num_elements());
  const int npe = vertices_per_element();

  for (int idx : connectivity_)
    if (idx < 0 || idx >= nv) throw std::invalid_argument("element vertex index out of range");

  for (int e = 0; e < ne; ++e) {
    if (kind_ == ElementKind::tet) {
      if (element_volume(e) <= 0.0)
        throw std::invalid_argument("tetrahedron with non-positive volume");
    } else {
      auto verts = element(e);
      const Vec3& lo = vertices_[verts[0]];
      const Vec3& hi = vertices_[verts[7]];
      if (!(hi.x > lo.x && hi.y > lo.y && hi.z > lo.z))
        throw std::invalid_argument("hexahedron is not a positively oriented box");
      static constexpr std::array<std::array<int, 3>, 8> bits = {
          {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}}};
      double scale = norm(hi - lo);
      for (int i = 0; i < 8; ++i) {
        Vec3 expect{bits[i][0] ? hi.x : lo.x, bits[i][1] ? hi.y : lo.y, bits[i][2] ? hi.z : lo.z};
        if (norm(vertices_[verts[i]] - expect) > 1e-9 * scale)
          throw std::invalid_argument("hexahedron is not an axis-aligned box in canonical order");
      }
    }
    if (!is_symmetric(conductivity_[e], 1e-12 * (std::abs(conductivity_[e](0, 0)) + 1.0)))
      throw std::invalid_argument("conductivity tensor must be symmetric");
    Mat3 V;
    auto ev = symmetric_eigen(conductivity_[e], V);
    for (double x : ev)
      if (!(x > 0.0)) throw std::invalid_argument("conductivity tensor must be positive definite");
  }

  // vertex -> element adjacency (CSR)
  v2e_offsets_.assign(nv + 1, 0);
  for (int idx : connectivity_) ++v2e_offsets_[idx + 1];
  for (int v = 0; v < nv; ++v) v2e_offsets_[v + 1] += v2e_offsets_[v];
  v2e_data_.assign(connectivity_.size(), 0);
  std::vector<std::int64_t> cursor(v2e_offsets_.begin(), v2e_offsets_.end() - 1);
  for (int e = 0; e < ne; ++e)
    for (int i = 0; i < npe; ++i) v2e_data_[cursor[connectivity_[e * npe + i]]++] = e;

  // boundary faces and vertices
  boundary_faces_.clear();
  for (int e = 0; e < ne; ++e)
    for (int f = 0; f < faces_per_element(); ++f)
      if (face_neighbor(e, f) < 0) boundary_faces_.emplace_back(e, f);
  std::vector<char> on_boundary(nv, 0);
  for (const auto& [e, f] : boundary_faces_) {
    if (kind_ == ElementKind::tet) {
      for (int v : face_vertices_tet(e, f)) on_boundary[v] = 1;
    } else {
      for (int v : face_vertices_hex(e, f)) on_boundary[v] = 1;
    }
  }
  boundary_vertices_.clear();
  for (int v = 0; v < nv; ++v)
    if (on_boundary[v]) boundary_vertices_.push_back(v);

  // uniform grid index
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi = -1.0 * lo;
  for (const Vec3& p : vertices_) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  double target = std::cbrt(static_cast<double>(std::max(ne, 1)));
  for (int a = 0; a < 3; ++a) {
    double extent = std::max(hi[a] - lo[a], 1e-30);
    grid_dims_[a] = std::clamp(static_cast<int>(target), 1, 192);
    grid_lo_[a] = lo[a];
    grid_cell_[a] = extent / grid_dims_[a] * (1.0 + 1e-12);
  }

  auto cell_range = [&](int e, std::array<int, 3>& c0, std::array<int, 3>& c1) {
    Vec3 elo = vertices_[element(e)[0]], ehi = elo;
    for (int v : element(e))
      for (int a = 0; a < 3; ++a) {
        elo[a] = std::min(elo[a], vertices_[v][a]);
        ehi[a] = std::max(ehi[a], vertices_[v][a]);
      }
    for (int a = 0; a < 3; ++a) {
      c0[a] = std::clamp(static_cast<int>(std::floor((elo[a] - grid_lo_[a]) / grid_cell_[a] - 1e-9)),
                         0, grid_dims_[a] - 1);
      c1[a] = std::clamp(static_cast<int>(std::floor((ehi[a] - grid_lo_[a]) / grid_cell_[a] + 1e-9)),
                         0, grid_dims_[a] - 1);
    }
  };

  std::int64_t ncells =
      static_cast<std::int64_t>(grid_dims_[0]) * grid_dims_[1] * grid_dims_[2];
  grid_offsets_.assign(ncells + 1, 0);
  std::array<int, 3> c0{}, c1{};
  for (int e = 0; e < ne; ++e) {
    cell_range(e, c0, c1);
    for (int z = c0[2]; z <= c1[2]; ++z)
      for (int y = c0[1]; y <= c1[1]; ++y)
        for (int x = c0[0]; x <= c1[0]; ++x)
          ++grid_offsets_[(static_cast<std::int64_t>(z) * grid_dims_[1] + y) * grid_dims_[0] + x + 1];
  }
  for (std::int64_t i = 0; i < ncells; ++i) grid_offsets_[i + 1] += grid_offsets_[i];
  grid_data_.assign(grid_offsets_[ncells], 0);
  std::vector<std::int64_t> gcur(grid_offsets_.begin(), grid_offsets_.end() - 1);
  for (int e = 0; e < ne; ++e) {
    cell_range(e, c0, c1);
    for (int z = c0[2]; z <= c1[2]; ++z)
      for (int y = c0[1]; y <= c1[1]; ++y)
        for (int x = c0[0]; x <= c1[0]; ++x)
          grid_data_[gcur[(static_cast<std::int64_t>(z) * grid_dims_[1] + y) * grid_dims_[0] + x]++] =
              e;
  }
}

double distance_edge_ratio(const Mesh& mesh, int element, const Vec3& x0) {
  double a = mesh.max_edge_length(element);
  double d = std::numeric_limits<double>::max();
  for (int v : mesh.element(element)) d = std::min(d, norm(mesh.vertex(v) - x0));
  for (int f = 0; f < mesh.faces_per_element(); ++f)
    d = std::min(d, norm(mesh.face_centroid(element, f) - x0));
  return d / a;
}

}  // namespace locsub::mesh
