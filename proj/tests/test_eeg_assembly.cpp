#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <set>

#include "locsub/dipole_fields.hpp"
#include "locsub/element_geometry.hpp"
#include "locsub/face_geometry.hpp"
#include "locsub/mesh.hpp"
#include "locsub/patch.hpp"
#include "locsub/quadrature.hpp"
#include "locsub/rhs_assembly.hpp"
#include "locsub/stiffness.hpp"

using namespace locsub;
using namespace locsub::mesh;
using namespace locsub::eeg;
using fields::Dipole;
using fields::HomogeneousConductivity;

namespace {

Mesh one_tet_mesh(const std::array<Vec3, 4>& p, const Mat3& sigma) {
  std::vector<Vec3> verts(p.begin(), p.end());
  return Mesh::build(ElementKind::tet, std::move(verts), {0, 1, 2, 3}, {1}, {sigma});
}

std::array<Vec3, 4> regular_tet() {
  const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  return {Vec3{0.0, -0.5, -s3 / 6.0}, Vec3{0.0, 0.0, s3 / 3.0}, Vec3{0.0, 0.5, -s3 / 6.0},
          Vec3{-s6 / 3.0, 0.0, 0.0}};  // positively oriented
}

std::array<Vec3, 4> random_tet(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    std::array<Vec3, 4> p;
    for (auto& v : p) v = {u(rng), u(rng), u(rng)};
    double vol = dot(cross(p[1] - p[0], p[2] - p[0]), p[3] - p[0]) / 6.0;
    double scale = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) scale = std::max(scale, norm(p[i] - p[j]));
    if (vol < 0.0) {
      std::swap(p[1], p[2]);
      vol = -vol;
    }
    if (vol > 0.02 * scale * scale * scale) return p;
  }
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return normalized(Vec3{n(rng), n(rng), n(rng)});
}

}  // namespace

TEST_CASE("stiffness: row sums vanish and matrix is PSD") {
  SphereModel model;
  Mesh m = split_hex_to_tet(generate_voxel_sphere(model, 24.0));
  auto K = assemble_stiffness(m);

  const auto& off = K.offsets();
  const auto& vals = K.values();
  for (int r = 0; r < K.rows(); ++r) {
    double sum = 0.0, mx = 0.0;
    for (auto k = off[r]; k < off[r + 1]; ++k) {
      sum += vals[k];
      mx = std::max(mx, std::abs(vals[k]));
    }
    CHECK(std::abs(sum) <= 1e-10 * mx);
  }

  std::mt19937_64 rng(9);
  std::vector<double> x(K.rows()), y;
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& v : x) v = std::normal_distribution<double>()(rng);
    K.multiply(x, y);
    double q = 0.0;
    for (int i = 0; i < K.rows(); ++i) q += x[i] * y[i];
    CHECK(q >= -1e-12);
  }
}

TEST_CASE("stiffness: single unit-conductivity tet matches barycentric assembly") {
  std::array<Vec3, 4> p = {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  Mesh m = one_tet_mesh(p, Mat3::identity());
  auto K = assemble_stiffness(m);

  // hand values: reference tet gradients and volume 1/6
  const Vec3 g[4] = {{-1, -1, -1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const double V = 1.0 / 6.0;
  const auto& off = K.offsets();
  const auto& cols = K.cols();
  const auto& vals = K.values();
  for (int i = 0; i < 4; ++i)
    for (auto k = off[i]; k < off[i + 1]; ++k)
      CHECK(vals[k] == doctest::Approx(V * dot(g[i], g[cols[k]])).epsilon(1e-12));
}

TEST_CASE("face geometry: frame and edge quantities") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto tet = random_tet(rng);
    std::array<Vec3, 3> tri = {tet[0], tet[1], tet[2]};
    Vec3 x0 = tet[3] + (0.5 + trial * 0.05) * random_unit(rng);
    if (point_triangle_distance(tri, x0) < 1e-6) continue;
    auto fg = face_geometry(tri, x0);

    CHECK(norm(fg.u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(fg.v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(fg.w) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dot(fg.u, fg.v)) <= 1e-12);
    CHECK(std::abs(dot(fg.u, fg.w)) <= 1e-12);
    CHECK(std::abs(dot(fg.v, fg.w)) <= 1e-12);
    CHECK(norm(cross(fg.u, fg.v) - fg.w) <= 1e-12);  // right-handed

    for (int i = 0; i < 3; ++i) {
      CHECK(fg.R_plus[i] >= std::abs(fg.gamma_plus[i]) - 1e-12);
      CHECK(fg.R_minus[i] >= std::abs(fg.gamma_minus[i]) - 1e-12);
      CHECK(std::isfinite(fg.f[i]));
    }
  }
}

TEST_CASE("face geometry: both log branches agree away from degeneracy") {
  auto tet = regular_tet();
  std::array<Vec3, 3> tri = {tet[0], tet[1], tet[2]};
  Vec3 w = normalized(cross(tri[1] - tri[0], tri[2] - tri[0]));
  Vec3 x0 = tri[0] + 0.3 * (tri[1] - tri[0]) + 0.2 * (tri[2] - tri[0]) - 1.0 * w;  // |w0| = 1
  auto fg = face_geometry(tri, x0);
  CHECK(std::abs(std::abs(fg.w0) - 1.0) <= 1e-12);
  for (int i = 0; i < 3; ++i) {
    double first =
        std::log((fg.R_plus[i] + fg.gamma_plus[i]) / (fg.R_minus[i] + fg.gamma_minus[i]));
    double second =
        std::log((fg.R_minus[i] - fg.gamma_minus[i]) / (fg.R_plus[i] - fg.gamma_plus[i]));
    CHECK(first == doctest::Approx(second).epsilon(1e-9));
    CHECK(fg.f[i] == doctest::Approx(first).epsilon(1e-12));
  }
}

TEST_CASE("face geometry: source on an edge-line extension stays finite") {
  auto tet = regular_tet();
  std::array<Vec3, 3> tri = {tet[0], tet[1], tet[2]};
  // beyond vertex tri[2] on the line through tri[1] -> tri[2]
  Vec3 x0 = tri[1] + 2.5 * (tri[2] - tri[1]);
  auto fg = face_geometry(tri, x0);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::isfinite(fg.f[i]));
    CHECK(std::isfinite(fg.beta_i[i]));
  }
  // the naive single-branch formula breaks on the degenerate edge
  bool naive_bad = false;
  for (int i = 0; i < 3; ++i) {
    double naive =
        std::log((fg.R_plus[i] + fg.gamma_plus[i]) / (fg.R_minus[i] + fg.gamma_minus[i]));
    if (!std::isfinite(naive) || std::abs(naive - fg.f[i]) > 1e-6 * std::abs(fg.f[i]))
      naive_bad = true;
  }
  CHECK(naive_bad);
}

namespace {

/// Independent oracle for the face moments: 2D quadrature of the chart
/// integrands over the triangle.
std::array<Vec3, 3> face_moments_quadrature(const std::array<Vec3, 3>& tri, const Vec3& x0,
                                            int order) {
  auto fg = face_geometry(tri, x0);
  auto rule = quad::simplex_rule(2, order);
  geom::TriFace face(tri);
  Vec3 M0{}, Mu{}, Mv{};
  for (std::size_t q = 0; q < rule->size(); ++q) {
    Vec3 x = face.map(rule->points[q].x, rule->points[q].y);
    double z1 = dot(fg.u, x - tri[0]) - fg.u0;
    double z2 = dot(fg.v, x - tri[0]) - fg.v0;
    Vec3 k = (x - x0) / std::pow(norm(x - x0), 3);
    double w = rule->weights[q] * face.area_factor;
    M0 += w * k;
    Mu += (w * z1) * k;
    Mv += (w * z2) * k;
  }
  return {M0, Mu, Mv};
}

}  // namespace

TEST_CASE("face moments match the quadrature oracle (catches the Mv misprint)") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    auto tet = random_tet(rng);
    std::array<Vec3, 3> tri = {tet[0], tet[1], tet[2]};
    double scale = norm(tri[1] - tri[0]);
    Vec3 x0;
    do {
      x0 = (tri[0] + tri[1] + tri[2]) / 3.0 +
           (0.8 + std::generate_canonical<double, 53>(rng)) * scale * random_unit(rng);
    } while (point_triangle_distance(tri, x0) < 0.5 * scale);
    auto fg = face_geometry(tri, x0);
    auto oracle = face_moments_quadrature(tri, x0, 40);
    CHECK(norm(fg.M0() - oracle[0]) <= 1e-8 * (norm(oracle[0]) + 1e-12));
    CHECK(norm(fg.Mu() - oracle[1]) <= 1e-8 * (norm(oracle[1]) + 1e-12));
    CHECK(norm(fg.Mv() - oracle[2]) <= 1e-8 * (norm(oracle[2]) + 1e-12));
  }
}

TEST_CASE("face chi moment is invariant under cyclic renumbering") {
  std::mt19937_64 rng(12);
  auto tet = random_tet(rng);
  std::array<Vec3, 3> tri = {tet[0], tet[1], tet[2]};
  Vec3 x0 = tet[3] + 1.2 * random_unit(rng);
  std::array<double, 3> c = {0.3, 1.0, -0.4};

  auto fg0 = face_geometry(tri, x0);
  Vec3 ref = fg0.chi_moment(c);
  double beta = fg0.beta;

  std::array<Vec3, 3> tri1 = {tri[1], tri[2], tri[0]};
  std::array<double, 3> c1 = {c[1], c[2], c[0]};
  auto fg1 = face_geometry(tri1, x0);
  CHECK(norm(fg1.chi_moment(c1) - ref) <= 1e-12 * norm(ref) + 1e-15);
  CHECK(std::abs(std::abs(fg1.beta) - std::abs(beta)) <= 1e-12);

  std::array<Vec3, 3> tri2 = {tri[2], tri[0], tri[1]};
  std::array<double, 3> c2 = {c[2], c[0], c[1]};
  auto fg2 = face_geometry(tri2, x0);
  CHECK(norm(fg2.chi_moment(c2) - ref) <= 1e-12 * norm(ref) + 1e-15);
}

namespace {

std::array<double, 4> transition_oracle(const std::array<Vec3, 4>& tet,
                                        const std::array<double, 4>& chi, const Dipole& d,
                                        const Mat3& sigma, double sigma_inf, int order) {
  Mesh m = one_tet_mesh(tet, sigma);
  HomogeneousConductivity cond(Mat3::identity(sigma_inf));
  auto v = transition_term_numeric(m, 0, {chi[0], chi[1], chi[2], chi[3]}, cond, d, order);
  return {v[0], v[1], v[2], v[3]};
}

double rel_diff(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  double diff = 0.0, ref = 0.0;
  for (int i = 0; i < 4; ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff / ref);
}

}  // namespace

TEST_CASE("analytic transition integral: trivial zero cases") {
  auto tet = regular_tet();
  Dipole zero{{2.0, 0.2, 0.1}, {0, 0, 0}};
  auto vals = transition_integral_analytic_tet(tet, {1, 1, 0, 0}, zero, Mat3::identity(), 1.0);
  for (double v : vals) CHECK(v == 0.0);

  Dipole d{{2.0, 0.2, 0.1}, {0.3, 0.5, -0.2}};
  auto vals2 = transition_integral_analytic_tet(tet, {0, 0, 0, 0}, d, Mat3::identity(), 1.0);
  for (double v : vals2) CHECK(v == 0.0);
}

TEST_CASE("analytic transition integral matches the order-50 oracle on the reference fixture") {
  auto tet = regular_tet();
  // chi = 1 on the x=0 face (vertices 0,1,2 here), 0 on the apex
  std::array<double, 4> chi = {1.0, 1.0, 1.0, 0.0};
  Dipole d{Vec3{1.0, 0.1, 0.1}, normalized(Vec3{0.3, 1.0, 0.5})};
  auto analytic = transition_integral_analytic_tet(tet, chi, d, Mat3::identity(2.0), 1.0);
  auto numeric = transition_oracle(tet, chi, d, Mat3::identity(2.0), 1.0, 50);
  CHECK(rel_diff(analytic, numeric) <= 1e-8);
}

TEST_CASE("analytic transition integral: random tets at d/a >= 0.5") {
  std::mt19937_64 rng(77);
  int tested = 0;
  while (tested < 30) {
    auto tet = random_tet(rng);
    Mesh m = one_tet_mesh(tet, Mat3::identity());
    Vec3 centroid = 0.25 * (tet[0] + tet[1] + tet[2] + tet[3]);
    double a = m.max_edge_length(0);
    Vec3 x0 =
        centroid + (1.0 + 2.0 * std::generate_canonical<double, 53>(rng)) * a * random_unit(rng);
    if (distance_edge_ratio(m, 0, x0) < 0.5) continue;
    std::array<double, 4> chi;
    for (auto& c : chi) c = std::generate_canonical<double, 53>(rng);
    Mat3 sigma;
    sigma.m = {1.2, 0.1, 0.0, 0.1, 0.8, -0.05, 0.0, -0.05, 1.5};
    Dipole d{x0, random_unit(rng)};
    auto analytic = transition_integral_analytic_tet(tet, chi, d, sigma, 0.7);
    auto numeric = transition_oracle(tet, chi, d, sigma, 0.7, 50);
    CHECK(rel_diff(analytic, numeric) <= 1e-7);
    ++tested;
  }
}

TEST_CASE("analytic transition integral rejects interior sources") {
  auto tet = regular_tet();
  Vec3 inside = 0.25 * (tet[0] + tet[1] + tet[2] + tet[3]);
  CHECK_THROWS(transition_integral_analytic_tet(tet, {1, 1, 1, 0}, {inside, {1, 0, 0}},
                                                Mat3::identity(), 1.0));
}

TEST_CASE("patch term: vanishes exactly when sigma matches sigma_inf") {
  auto tet = regular_tet();
  Mesh m = one_tet_mesh(tet, Mat3::identity(0.33));
  HomogeneousConductivity cond(Mat3::identity(0.33));
  Mat3 sigma_c = m.conductivity(0) - cond.tensor();
  // x0 inside the element: the short-circuit must not touch u_inf
  Vec3 inside = 0.25 * (tet[0] + tet[1] + tet[2] + tet[3]);
  auto vals = patch_term_numeric(m, 0, sigma_c, cond, {inside, {1, 0, 0}}, 8);
  for (double v : vals) CHECK(v == 0.0);
}

TEST_CASE("surface term: orientation flip negates values") {
  auto tet = regular_tet();
  Mesh m = one_tet_mesh(tet, Mat3::identity());
  HomogeneousConductivity cond(Mat3::identity());
  Dipole d{{1.0, 0.2, 0.0}, {0.3, -0.7, 0.2}};
  Vec3 n = m.face_normal(0, 3);
  auto a = surface_term_numeric(m, 0, 3, n, cond, d, 6);
  auto b = surface_term_numeric(m, 0, 3, -1.0 * n, cond, d, 6);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(-b[i]).epsilon(1e-14));
}

TEST_CASE("hex transition term: order 6 vs order 50 at d/a = 1") {
  std::vector<Vec3> verts = {{-1.0, -0.5, -0.5}, {0.0, -0.5, -0.5}, {-1.0, 0.5, -0.5},
                             {0.0, 0.5, -0.5},   {-1.0, -0.5, 0.5}, {0.0, -0.5, 0.5},
                             {-1.0, 0.5, 0.5},   {0.0, 0.5, 0.5}};
  Mesh m = Mesh::build(ElementKind::hex, std::move(verts), {0, 1, 2, 3, 4, 5, 6, 7}, {1},
                       {Mat3::identity(2.0)});
  HomogeneousConductivity cond(Mat3::identity());
  Dipole d{Vec3{1.0, 0.1, 0.1}, normalized(Vec3{0.3, 1.0, 0.5})};
  std::vector<double> chi = {0, 1, 0, 1, 0, 1, 0, 1};
  auto v6 = transition_term_numeric(m, 0, chi, cond, d, 6);
  auto v50 = transition_term_numeric(m, 0, chi, cond, d, 50);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < v6.size(); ++i) {
    diff += (v6[i] - v50[i]) * (v6[i] - v50[i]);
    ref += v50[i] * v50[i];
  }
  CHECK(std::sqrt(diff / ref) <= 1e-4);
}

TEST_CASE("EEG integrands scale as 1/lambda under geometric scaling") {
  auto tet = regular_tet();
  Dipole d{Vec3{0.9, 0.13, 0.07}, normalized(Vec3{0.2, -1.0, 0.4})};
  Mat3 sigma = Mat3::identity(2.0);
  HomogeneousConductivity cond(Mat3::identity());
  Mesh m1 = one_tet_mesh(tet, sigma);
  Mat3 sigma_c = sigma - cond.tensor();
  auto base = patch_term_numeric(m1, 0, sigma_c, cond, d, 12);
  for (double lambda : {0.5, 2.0}) {
    std::array<Vec3, 4> scaled;
    for (int i = 0; i < 4; ++i) scaled[i] = lambda * tet[i];
    Mesh ml = one_tet_mesh(scaled, sigma);
    Dipole dl{lambda * d.position, d.moment};
    auto vals = patch_term_numeric(ml, 0, sigma_c, cond, dl, 12);
    for (int i = 0; i < 4; ++i) CHECK(vals[i] == doctest::Approx(base[i] / lambda).epsilon(1e-12));
  }
}

namespace {

struct SmallSetup {
  Mesh mesh;
  Dipole dipole;
};

SmallSetup small_sphere_tet() {
  SphereModel model;
  Mesh m = split_hex_to_tet(generate_voxel_sphere(model, 12.0));
  return {std::move(m), Dipole{{0.0171, 0.0052, -0.0033}, normalized(Vec3{0.3, 0.9, 0.1})}};
}

}  // namespace

TEST_CASE("localized rhs: vanishes on constants, support bound, linearity") {
  auto setup = small_sphere_tet();
  Patch patch = build_patch(setup.mesh, setup.dipole.position, 2);
  auto rhs = assemble_rhs_localized(setup.mesh, patch, setup.dipole);

  CHECK(std::abs(rhs.sum()) <= 1e-10 * rhs.norm1());

  // support confined to patch+transition vertices
  std::set<int> allowed;
  for (int e : patch.patch_elements)
    for (int v : setup.mesh.element(e)) allowed.insert(v);
  for (int e : patch.transition_elements)
    for (int v : setup.mesh.element(e)) allowed.insert(v);
  CHECK(rhs.entries.size() <= allowed.size());
  for (const auto& [v, val] : rhs.entries) CHECK(allowed.count(v) == 1);

  // exact linearity in the moment
  Dipole twice{setup.dipole.position, 2.0 * setup.dipole.moment};
  auto rhs2 = assemble_rhs_localized(setup.mesh, patch, twice);
  REQUIRE(rhs2.entries.size() == rhs.entries.size());
  for (std::size_t i = 0; i < rhs.entries.size(); ++i) {
    CHECK(rhs2.entries[i].first == rhs.entries[i].first);
    CHECK(rhs2.entries[i].second == 2.0 * rhs.entries[i].second);
  }
}

TEST_CASE("exhaustive extensions reproduce the classical subtraction rhs") {
  auto setup = small_sphere_tet();
  Patch patch = build_patch(setup.mesh, setup.dipole.position, 1 << 30);
  CHECK(patch.transition_elements.empty());
  auto loc = assemble_rhs_localized(setup.mesh, patch, setup.dipole);
  auto full = assemble_rhs_full_subtraction(setup.mesh, setup.dipole);
  REQUIRE(loc.entries.size() == full.entries.size());
  double scale = full.norm1();
  for (std::size_t i = 0; i < loc.entries.size(); ++i) {
    CHECK(loc.entries[i].first == full.entries[i].first);
    CHECK(std::abs(loc.entries[i].second - full.entries[i].second) <= 1e-12 * scale);
  }
}

TEST_CASE("hex localized rhs also vanishes on constants") {
  SphereModel model;
  Mesh m = generate_voxel_sphere(model, 12.0);
  Dipole d{{0.0171, 0.0052, -0.0033}, normalized(Vec3{0.3, 0.9, 0.1})};
  Patch patch = build_patch(m, d.position, 2);
  auto rhs = assemble_rhs_localized(m, patch, d);
  CHECK(std::abs(rhs.sum()) <= 1e-10 * rhs.norm1());
}
