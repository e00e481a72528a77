#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "locsub/mesh.hpp"
#include "locsub/patch.hpp"

using namespace locsub;
using namespace locsub::mesh;

namespace {

Mesh unit_cube_mesh() {
  std::vector<Vec3> verts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
                             {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  return Mesh::build(ElementKind::hex, std::move(verts), {0, 1, 2, 3, 4, 5, 6, 7}, {1},
                     {Mat3::identity()});
}

Mesh two_cube_mesh() {
  std::vector<Vec3> verts;
  std::vector<int> conn;
  for (int c = 0; c < 2; ++c)
    for (int z = 0; z <= 1; ++z)
      for (int y = 0; y <= 1; ++y)
        for (int x = 0; x <= 1; ++x) verts.push_back({double(x + c), double(y), double(z)});
  // deduplicate shared face vertices
  std::vector<Vec3> uniq;
  std::vector<int> remap(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    int found = -1;
    for (std::size_t j = 0; j < uniq.size(); ++j)
      if (norm(uniq[j] - verts[i]) < 1e-12) {
        found = int(j);
        break;
      }
    if (found < 0) {
      found = int(uniq.size());
      uniq.push_back(verts[i]);
    }
    remap[i] = found;
  }
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 8; ++i) conn.push_back(remap[8 * c + i]);
  return Mesh::build(ElementKind::hex, std::move(uniq), std::move(conn), {1, 1},
                     {Mat3::identity(), Mat3::identity()});
}

const char* kTinyGmsh =
    "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
    "$Nodes\n4\n1 0 0 0\n2 10 0 0\n3 0 10 0\n4 0 0 10\n$EndNodes\n"
    "$Elements\n1\n1 4 2 1 1 1 2 3 4\n$EndElements\n";

const char* kBadIndexGmsh =
    "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
    "$Nodes\n4\n1 0 0 0\n2 10 0 0\n3 0 10 0\n4 0 0 10\n$EndNodes\n"
    "$Elements\n1\n1 4 2 1 1 1 2 3 999\n$EndElements\n";

std::string write_temp(const char* text, const char* name) {
  std::string path = std::string("/tmp/") + name;
  std::ofstream os(path);
  os << text;
  return path;
}

}  // namespace

TEST_CASE("gmsh reader: minimal valid file") {
  auto path = write_temp(kTinyGmsh, "tiny.msh");
  Mesh m = load_gmsh_ascii(path, {{1, Mat3::identity(0.33)}});
  CHECK(m.num_elements() == 1);
  CHECK(m.label(0) == 1);
  CHECK(m.kind() == ElementKind::tet);
  // mm -> m conversion
  CHECK(m.element_volume(0) == doctest::Approx(1e-6 / 6.0).epsilon(1e-12));
}

TEST_CASE("gmsh reader: malformed input") {
  auto path = write_temp(kBadIndexGmsh, "bad.msh");
  CHECK_THROWS(load_gmsh_ascii(path, {{1, Mat3::identity(0.33)}}));
  auto path2 = write_temp(kTinyGmsh, "tiny2.msh");
  CHECK_THROWS(load_gmsh_ascii(path2, {{7, Mat3::identity(0.33)}}));  // unknown region tag
}

TEST_CASE("gmsh reader: multi-shell sphere file round trip") {
  // exercise the reader on a real-sized unstructured file written by us
  SphereModel model;
  Mesh hex = generate_voxel_sphere(model, 8.0);
  Mesh tet = split_hex_to_tet(hex);
  std::string path = "/tmp/sphere_test.msh";
  {
    std::ofstream os(path);
    os << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << tet.num_vertices() << "\n";
    for (std::size_t v = 0; v < tet.num_vertices(); ++v) {
      const Vec3& p = tet.vertex(v);
      os << v + 1 << ' ' << p.x * 1e3 << ' ' << p.y * 1e3 << ' ' << p.z * 1e3 << '\n';
    }
    os << "$EndNodes\n$Elements\n" << tet.num_elements() << "\n";
    for (std::size_t e = 0; e < tet.num_elements(); ++e) {
      auto verts = tet.element(int(e));
      os << e + 1 << " 4 2 " << tet.label(int(e)) << " 1 " << verts[0] + 1 << ' ' << verts[1] + 1
         << ' ' << verts[2] + 1 << ' ' << verts[3] + 1 << '\n';
    }
    os << "$EndElements\n";
  }
  std::map<int, Mat3> cond;
  for (int l = 0; l < 4; ++l) cond[l + 1] = Mat3::identity(model.layer_conductivities[l]);
  Mesh loaded = load_gmsh_ascii(path, cond);
  CHECK(loaded.num_elements() == tet.num_elements());

  auto vols = loaded.volume_by_label();
  auto shell = [&](int l) {
    double ri = l == 0 ? 0.0 : 1e-3 * model.layer_radii_mm[l - 1];
    double ro = 1e-3 * model.layer_radii_mm[l];
    return 4.0 / 3.0 * std::numbers::pi * (ro * ro * ro - ri * ri * ri);
  };
  // voxel labeling by center: thin shells carry the staircase error, so only
  // check the brain compartment and the total against the closed forms here
  CHECK(vols[1] == doctest::Approx(shell(0)).epsilon(0.05));
  double total = loaded.total_volume();
  double ball = 4.0 / 3.0 * std::numbers::pi * std::pow(1e-3 * model.layer_radii_mm[3], 3);
  CHECK(total == doctest::Approx(ball).epsilon(0.05));
}

TEST_CASE("voxel sphere: volume and labels") {
  SphereModel model;
  Mesh m = generate_voxel_sphere(model, 4.0);
  double ball = 4.0 / 3.0 * std::numbers::pi * std::pow(0.092, 3);
  CHECK(m.total_volume() == doctest::Approx(ball).epsilon(0.05));

  for (int e = 0; e < int(m.num_elements()); e += 97) {
    double r = norm(m.element_centroid(e)) * 1e3;
    if (r < 78.0) {
      CHECK(m.label(e) == 1);
      CHECK(m.conductivity(e)(0, 0) == doctest::Approx(0.33));
    }
  }
  CHECK_THROWS(generate_voxel_sphere(model, 200.0));
  CHECK_THROWS(generate_voxel_sphere(model, -1.0));
}

TEST_CASE("hex to tet split conserves volume and conforms") {
  Mesh cube = unit_cube_mesh();
  Mesh tets = split_hex_to_tet(cube);
  CHECK(tets.num_elements() == 6);
  double total = 0.0;
  for (int e = 0; e < 6; ++e) total += tets.element_volume(e);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(split_hex_to_tet(tets));

  Mesh two = two_cube_mesh();
  Mesh twot = split_hex_to_tet(two);
  // conforming: every interior face shared by exactly two elements
  std::map<std::array<int, 3>, int> face_count;
  for (int e = 0; e < int(twot.num_elements()); ++e)
    for (int f = 0; f < 4; ++f) {
      auto fv = twot.face_vertices_tet(e, f);
      std::array<int, 3> key = {fv[0], fv[1], fv[2]};
      std::sort(key.begin(), key.end());
      ++face_count[key];
    }
  for (const auto& [key, count] : face_count) CHECK(count <= 2);
  // boundary area of the 1x1x2 box: 10
  double area = 0.0;
  for (const auto& [e, f] : twot.boundary_faces()) area += twot.face_area(e, f);
  CHECK(area == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("split conserves the volume of every hex") {
  SphereModel model;
  Mesh hex = generate_voxel_sphere(model, 16.0);
  Mesh tet = split_hex_to_tet(hex);
  REQUIRE(tet.num_elements() == 6 * hex.num_elements());
  for (int e = 0; e < int(hex.num_elements()); ++e) {
    double sum = 0.0;
    for (int k = 0; k < 6; ++k) sum += tet.element_volume(6 * e + k);
    CHECK(sum == doctest::Approx(hex.element_volume(e)).epsilon(1e-13));
  }
}

TEST_CASE("chi interpolates to 1 on patch elements and 0 outside the support") {
  SphereModel model;
  for (bool split : {false, true}) {
    Mesh m = generate_voxel_sphere(model, 12.0);
    if (split) m = split_hex_to_tet(m);
    Patch p = build_patch(m, {0.0171, 0.0052, -0.0033}, 2);
    std::set<int> in_support(p.patch_elements.begin(), p.patch_elements.end());
    in_support.insert(p.transition_elements.begin(), p.transition_elements.end());
    // multilinear/affine interpolation at the centroid is the vertex mean
    for (int e : p.patch_elements) {
      double chi = 0.0;
      for (int v : m.element(e)) chi += p.chi(v);
      CHECK(chi / m.vertices_per_element() == 1.0);
    }
    int outside_checked = 0;
    for (int e = 0; e < int(m.num_elements()) && outside_checked < 50; e += 7) {
      if (in_support.count(e)) continue;
      double chi = 0.0;
      for (int v : m.element(e)) chi += p.chi(v);
      CHECK(chi == 0.0);
      ++outside_checked;
    }
    CHECK(outside_checked == 50);
  }
}

TEST_CASE("gmsh reader rejects unsupported volume element types") {
  const char* with_hex =
      "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
      "$Nodes\n8\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n5 0 0 1\n6 1 0 1\n7 1 1 1\n8 0 1 1\n"
      "$EndNodes\n"
      "$Elements\n1\n1 5 2 1 1 1 2 3 4 5 6 7 8\n$EndElements\n";  // type 5 = hex8
  auto path = write_temp(with_hex, "hex8.msh");
  CHECK_THROWS(load_gmsh_ascii(path, {{1, Mat3::identity(0.33)}}));
}

TEST_CASE("gmsh reader rejects inverted tetrahedra") {
  const char* inverted =
      "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
      "$Nodes\n4\n1 0 0 0\n2 10 0 0\n3 0 10 0\n4 0 0 10\n$EndNodes\n"
      "$Elements\n1\n1 4 2 1 1 1 3 2 4\n$EndElements\n";
  auto path = write_temp(inverted, "inverted.msh");
  CHECK_THROWS(load_gmsh_ascii(path, {{1, Mat3::identity(0.33)}}));
}

TEST_CASE("split per-compartment volumes match the hex mesh") {
  SphereModel model;
  Mesh hex = generate_voxel_sphere(model, 8.0);
  Mesh tet = split_hex_to_tet(hex);
  auto vh = hex.volume_by_label();
  auto vt = tet.volume_by_label();
  for (const auto& [label, vol] : vh)
    CHECK(vt[label] == doctest::Approx(vol).epsilon(1e-12));
}

TEST_CASE("vertex extension basics") {
  SphereModel model;
  Mesh m = generate_voxel_sphere(model, 16.0);
  CHECK(vertex_extension(m, {}).empty());

  // interior voxel: 3x3x3 neighborhood
  int interior = -1;
  for (int e = 0; e < int(m.num_elements()); ++e)
    if (norm(m.element_centroid(e)) < 0.03) {
      interior = e;
      break;
    }
  REQUIRE(interior >= 0);
  auto ext = vertex_extension(m, {interior});
  CHECK(ext.size() == 27);

  CHECK_THROWS(vertex_extension(m, {int(m.num_elements())}));
}

TEST_CASE("vertex extension is monotone (exhaustive on a small mesh)") {
  SphereModel model;
  Mesh m = generate_voxel_sphere(model, 36.0);
  REQUIRE(m.num_elements() <= 100);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> a, b;
    for (int e = 0; e < int(m.num_elements()); ++e) {
      double r = std::generate_canonical<double, 53>(rng);
      if (r < 0.2) a.push_back(e);
      if (r < 0.45) b.push_back(e);  // a subset of b by construction
    }
    auto ea = vertex_extension(m, a);
    auto eb = vertex_extension(m, b);
    CHECK(std::includes(eb.begin(), eb.end(), ea.begin(), ea.end()));
    // superset of the input
    CHECK(std::includes(ea.begin(), ea.end(), a.begin(), a.end()));
  }
  // idempotent only at the full mesh
  std::vector<int> all;
  for (int e = 0; e < int(m.num_elements()); ++e) all.push_back(e);
  CHECK(vertex_extension(m, all) == all);
}

TEST_CASE("build_patch: sizes, chi and boundary") {
  SphereModel model;
  Mesh m = generate_voxel_sphere(model, 8.0);
  Vec3 x0{0.0131, 0.0027, -0.0019};  // interior, off the voxel planes

  Patch p0 = build_patch(m, x0, 0);
  CHECK(p0.patch_elements.size() == 1);
  CHECK(p0.patch_elements[0] == p0.source_element);

  Patch p = build_patch(m, x0, 2);
  CHECK(p.patch_elements.size() == 125);
  CHECK(p.transition_elements.size() == 343 - 125);
  CHECK(p.in_patch(p.source_element));

  // disjoint sets
  for (int e : p.transition_elements) CHECK(!p.in_patch(e));

  // chi: 1 on patch-element vertices, 0 on the remaining stored ones
  for (int e : p.patch_elements)
    for (int v : m.element(e)) CHECK(p.chi(v) == 1.0);
  int zeros = 0;
  for (const auto& [v, val] : p.chi_vertex_values)
    if (val == 0.0) ++zeros;
  CHECK(zeros > 0);

  // closed boundary: sum of area-weighted normals vanishes
  Vec3 s{};
  double area = 0.0;
  for (const auto& bf : p.boundary_faces) {
    double a = m.face_area(bf.element, bf.local_face);
    s += a * bf.normal;
    area += a;
  }
  CHECK(norm(s) <= 1e-10 * area);

  // normals point away from the patch
  Vec3 centroid{};
  for (int e : p.patch_elements) centroid += m.element_centroid(e);
  centroid = centroid / double(p.patch_elements.size());
  for (const auto& bf : p.boundary_faces)
    CHECK(dot(m.face_centroid(bf.element, bf.local_face) - centroid, bf.normal) > 0.0);

  // errors: outside and on-face positions
  CHECK_THROWS(build_patch(m, {1.0, 0.0, 0.0}, 2));
  CHECK_THROWS(build_patch(m, {0.008, 0.004, 0.0}, 2));  // z on a voxel plane
}

TEST_CASE("build_patch exhausts to the whole mesh") {
  SphereModel model;
  Mesh m = generate_voxel_sphere(model, 16.0);
  Patch p = build_patch(m, {0.0101, 0.0053, -0.0027}, 1 << 30);
  CHECK(p.patch_elements.size() == m.num_elements());
  CHECK(p.transition_elements.empty());
  CHECK(p.boundary_faces.size() == m.boundary_faces().size());
  for (const auto& [v, chi] : p.chi_vertex_values) CHECK(chi == 1.0);
}

TEST_CASE("locate_element agrees with the linear-scan oracle") {
  SphereModel model;
  Mesh m = generate_voxel_sphere(model, 12.0);
  Mesh t = split_hex_to_tet(m);
  std::mt19937_64 rng(23);
  int hits = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vec3 x{(std::generate_canonical<double, 53>(rng) - 0.5) * 0.2,
           (std::generate_canonical<double, 53>(rng) - 0.5) * 0.2,
           (std::generate_canonical<double, 53>(rng) - 0.5) * 0.2};
    auto fast = t.locate_element(x);
    auto slow = t.locate_element_brute(x);
    CHECK(fast.has_value() == slow.has_value());
    if (fast && slow) {
      CHECK(*fast == *slow);
      ++hits;
    }
  }
  CHECK(hits > 300);

  // centroid of element k -> k (tie-break cannot trigger strictly inside)
  for (int e = 0; e < int(t.num_elements()); e += 509)
    CHECK(t.locate_element(t.element_centroid(e)) == e);
  CHECK(!t.locate_element({1.0, 1.0, 1.0}));
}

TEST_CASE("distance edge ratio") {
  // regular unit-edge tetrahedron used by the order studies
  const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  std::vector<Vec3> verts = {{0.0, -0.5, -s3 / 6.0},
                             {0.0, 0.5, -s3 / 6.0},
                             {0.0, 0.0, s3 / 3.0},
                             {-s6 / 3.0, 0.0, 0.0}};
  auto vcopy = verts;
  Mesh m = Mesh::build(ElementKind::tet, std::move(vcopy), {0, 2, 1, 3}, {1}, {Mat3::identity()});

  Vec3 x0 = 2.0 * Vec3{1.0, 0.1, 0.1};
  // direct evaluation of the definition
  double a = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) a = std::max(a, norm(verts[i] - verts[j]));
  double d = 1e300;
  for (int i = 0; i < 4; ++i) d = std::min(d, norm(verts[i] - x0));
  for (int f = 0; f < 4; ++f) d = std::min(d, norm(m.face_centroid(0, f) - x0));
  CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(distance_edge_ratio(m, 0, x0) == doctest::Approx(d / a).epsilon(1e-13));

  // scale invariance
  std::vector<Vec3> scaled;
  for (const auto& v : verts) scaled.push_back(3.7 * v);
  Mesh ms = Mesh::build(ElementKind::tet, std::move(scaled), {0, 2, 1, 3}, {1},
                        {Mat3::identity()});
  CHECK(distance_edge_ratio(ms, 0, 3.7 * x0) ==
        doctest::Approx(distance_edge_ratio(m, 0, x0)).epsilon(1e-12));

  // corner: ratio 0
  CHECK(distance_edge_ratio(m, 0, verts[0]) == 0.0);
}

TEST_CASE("mesh json round trip") {
  SphereModel model;
  Mesh m = generate_voxel_sphere(model, 16.0);
  save_mesh_json(m, "/tmp/mesh_dump.json");
  Mesh l = load_mesh_json("/tmp/mesh_dump.json");
  CHECK(l.num_vertices() == m.num_vertices());
  CHECK(l.num_elements() == m.num_elements());
  CHECK(l.total_volume() == doctest::Approx(m.total_volume()).epsilon(1e-12));
  CHECK(l.label(0) == m.label(0));
}

TEST_CASE("mesh validation rejects bad input") {
  std::vector<Vec3> verts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  // inverted tet
  CHECK_THROWS(Mesh::build(ElementKind::tet, verts, {0, 2, 1, 3}, {1}, {Mat3::identity()}));
  // index out of range
  CHECK_THROWS(Mesh::build(ElementKind::tet, verts, {0, 1, 2, 9}, {1}, {Mat3::identity()}));
  // non-positive-definite conductivity
  CHECK_THROWS(Mesh::build(ElementKind::tet, verts, {0, 1, 2, 3}, {1}, {Mat3::identity(-1.0)}));
}
