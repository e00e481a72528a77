#include "locsub/rhs_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "locsub/element_geometry.hpp"
#include "locsub/face_geometry.hpp"
#include "locsub/quadrature.hpp"

namespace locsub::eeg {

using fields::Dipole;
using fields::HomogeneousConductivity;
using mesh::ElementKind;
using mesh::Mesh;
using mesh::Patch;
using solver::SparseVector;

namespace {

constexpr double kContainTol = 1e-12;

double max_abs(const Mat3& t) {
  double m = 0.0;
  for (double v : t.m) m = std::max(m, std::abs(v));
  return m;
}

bool effectively_zero(const Mat3& sigma_c, const Mat3& sigma_inf) {
  return max_abs(sigma_c) <= 1e-14 * max_abs(sigma_inf);
}

int tet_patch_order(const Mesh& mesh, int element, const Vec3& x0, RhsReport* report) {
  double ratio = mesh::distance_edge_ratio(mesh, element, x0);
  if (ratio >= 1.0 / 6.0) return quad::select_tet_patch_order(ratio);
  if (report) ++report->clamped_patch_orders;
  return 20;  // below the table's validity range; clamp to its highest order
}

// Surface-term order and distance-to-size ratio of one face. High orders
// keep the discrete functional zero-sum as faces approach the source.
void surface_face_metrics(const Mesh& mesh, int element, int local_face, const Vec3& x0,
                          int base_order, int& order, double& ratio) {
  double d = std::numeric_limits<double>::max();
  double a = 0.0;
  auto consider = [&](const Vec3& p, const Vec3& q) { a = std::max(a, norm(p - q)); };
  if (mesh.kind() == ElementKind::tet) {
    auto fv = mesh.face_vertices_tet(element, local_face);
    for (int i = 0; i < 3; ++i) {
      d = std::min(d, norm(mesh.vertex(fv[i]) - x0));
      consider(mesh.vertex(fv[i]), mesh.vertex(fv[(i + 1) % 3]));
    }
  } else {
    auto fv = mesh.face_vertices_hex(element, local_face);
    for (int i = 0; i < 4; ++i) {
      d = std::min(d, norm(mesh.vertex(fv[i]) - x0));
      consider(mesh.vertex(fv[i]), mesh.vertex(fv[(i + 1) % 4]));
    }
  }
  d = std::min(d, norm(mesh.face_centroid(element, local_face) - x0));
  ratio = d / a;
  if (ratio >= 1.0)
    order = base_order;
  else if (ratio >= 0.5)
    order = 34;
  else if (ratio >= 0.25)
    order = 44;
  else
    order = 50;
}

}  // namespace

std::vector<double> patch_term_numeric(const Mesh& mesh, int element, const Mat3& sigma_c,
                                       const HomogeneousConductivity& sigma_inf,
                                       const Dipole& dipole, int order) {
  const int npe = mesh.vertices_per_element();
  std::vector<double> out(npe, 0.0);
  if (effectively_zero(sigma_c, sigma_inf.tensor())) return out;

  auto verts = mesh.element(element);
  if (mesh.kind() == ElementKind::tet) {
    geom::TetGeom g({mesh.vertex(verts[0]), mesh.vertex(verts[1]), mesh.vertex(verts[2]),
                     mesh.vertex(verts[3])});
    auto rule = quad::simplex_rule(3, order);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      Vec3 x = g.map(rule->points[q]);
      Vec3 scg = sigma_c * fields::grad_u_infinity(sigma_inf, dipole, x);
      double w = rule->weights[q] * g.abs_det;
      for (int i = 0; i < 4; ++i) out[i] += w * dot(scg, g.grad[i]);
    }
  } else {
    geom::BoxGeom g(mesh.vertex(verts[0]), mesh.vertex(verts[7]));
    auto rule = quad::cube_rule(3, order);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      Vec3 x = g.map(rule->points[q]);
      Vec3 scg = sigma_c * fields::grad_u_infinity(sigma_inf, dipole, x);
      auto grads = g.basis_grad(rule->points[q]);
      double w = rule->weights[q] * g.abs_det;
      for (int i = 0; i < 8; ++i) out[i] += w * dot(scg, grads[i]);
    }
  }
  return out;
}

std::vector<double> transition_term_numeric(const Mesh& mesh, int element,
                                            const std::vector<double>& chi_values,
                                            const HomogeneousConductivity& sigma_inf,
                                            const Dipole& dipole, int order) {
  const int npe = mesh.vertices_per_element();
  if (static_cast<int>(chi_values.size()) != npe)
    throw std::invalid_argument("chi_values size does not match the element");
  if (mesh.contains(element, dipole.position, kContainTol))
    throw std::domain_error("transition integrand is singular: x0 inside the element");

  std::vector<double> out(npe, 0.0);
  const Mat3& sigma = mesh.conductivity(element);
  auto verts = mesh.element(element);
  if (mesh.kind() == ElementKind::tet) {
    geom::TetGeom g({mesh.vertex(verts[0]), mesh.vertex(verts[1]), mesh.vertex(verts[2]),
                     mesh.vertex(verts[3])});
    Vec3 grad_chi{};
    for (int i = 0; i < 4; ++i) grad_chi += chi_values[i] * g.grad[i];
    auto rule = quad::simplex_rule(3, order);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      const Vec3& ref = rule->points[q];
      Vec3 x = g.map(ref);
      auto bas = geom::TetGeom::basis(ref);
      double chi = 0.0;
      for (int i = 0; i < 4; ++i) chi += chi_values[i] * bas[i];
      Vec3 integrand = sigma * (fields::u_infinity(sigma_inf, dipole, x) * grad_chi +
                                chi * fields::grad_u_infinity(sigma_inf, dipole, x));
      double w = rule->weights[q] * g.abs_det;
      for (int i = 0; i < 4; ++i) out[i] += w * dot(integrand, g.grad[i]);
    }
  } else {
    geom::BoxGeom g(mesh.vertex(verts[0]), mesh.vertex(verts[7]));
    auto rule = quad::cube_rule(3, order);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      const Vec3& ref = rule->points[q];
      Vec3 x = g.map(ref);
      auto bas = g.basis(ref);
      auto grads = g.basis_grad(ref);
      double chi = 0.0;
      Vec3 grad_chi{};
      for (int i = 0; i < 8; ++i) {
        chi += chi_values[i] * bas[i];
        grad_chi += chi_values[i] * grads[i];
      }
      Vec3 integrand = sigma * (fields::u_infinity(sigma_inf, dipole, x) * grad_chi +
                                chi * fields::grad_u_infinity(sigma_inf, dipole, x));
      double w = rule->weights[q] * g.abs_det;
      for (int i = 0; i < 8; ++i) out[i] += w * dot(integrand, grads[i]);
    }
  }
  return out;
}

std::vector<double> surface_term_numeric(const Mesh& mesh, int element, int local_face,
                                         const Vec3& normal,
                                         const HomogeneousConductivity& sigma_inf,
                                         const Dipole& dipole, int order) {
  if (mesh.kind() == ElementKind::tet) {
    auto fv = mesh.face_vertices_tet(element, local_face);
    geom::TriFace face({mesh.vertex(fv[0]), mesh.vertex(fv[1]), mesh.vertex(fv[2])});
    auto rule = quad::simplex_rule(2, order);
    std::vector<double> out(3, 0.0);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      double s = rule->points[q].x, t = rule->points[q].y;
      Vec3 x = face.map(s, t);
      double flux = dot(fields::sigma_grad_u_infinity(sigma_inf, dipole, x), normal);
      auto bas = geom::TriFace::basis(s, t);
      double w = rule->weights[q] * face.area_factor;
      for (int i = 0; i < 3; ++i) out[i] += w * flux * bas[i];
    }
    return out;
  }
  auto fv = mesh.face_vertices_hex(element, local_face);
  geom::QuadFace face(
      {mesh.vertex(fv[0]), mesh.vertex(fv[1]), mesh.vertex(fv[2]), mesh.vertex(fv[3])});
  auto rule = quad::cube_rule(2, order);
  std::vector<double> out(4, 0.0);
  for (std::size_t q = 0; q < rule->size(); ++q) {
    double s = rule->points[q].x, t = rule->points[q].y;
    Vec3 x = face.map(s, t);
    double flux = dot(fields::sigma_grad_u_infinity(sigma_inf, dipole, x), normal);
    auto bas = geom::QuadFace::basis(s, t);
    double w = rule->weights[q] * face.area_factor;
    for (int i = 0; i < 4; ++i) out[i] += w * flux * bas[i];
  }
  return out;
}

int find_source_element(const Mesh& mesh, const Vec3& x0) {
  auto located = mesh.locate_element(x0);
  if (!located) throw std::invalid_argument("dipole position lies outside the mesh");
  int src = *located;
  if (!mesh.strictly_contains(src, x0, kContainTol))
    throw std::invalid_argument("dipole position lies on an element boundary");
  return src;
}

namespace {

void accumulate(SparseVector& rhs, std::span<const int> verts, const std::vector<double>& vals,
                double scale) {
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (vals[i] != 0.0) rhs.add(verts[i], scale * vals[i]);
}

}  // namespace

SparseVector assemble_rhs_localized(const Mesh& mesh, const Patch& patch, const Dipole& dipole,
                                    RhsReport* report) {
  const bool is_tet = mesh.kind() == ElementKind::tet;
  HomogeneousConductivity sigma_inf(mesh.conductivity(patch.source_element));
  if (report) report->source_element = patch.source_element;

  SparseVector rhs;

  // transition term
  const int transition_order =
      is_tet ? 6 : quad::fixed_orders(quad::ElementKind::hex, quad::Problem::eeg,
                                      quad::SingularTerm::transition);
  std::vector<double> chi(mesh.vertices_per_element());
  for (int e : patch.transition_elements) {
    auto verts = mesh.element(e);
    for (int i = 0; i < mesh.vertices_per_element(); ++i) chi[i] = patch.chi(verts[i]);
    if (is_tet && sigma_inf.isotropic()) {
      auto vals = transition_integral_analytic_tet(
          {mesh.vertex(verts[0]), mesh.vertex(verts[1]), mesh.vertex(verts[2]),
           mesh.vertex(verts[3])},
          {chi[0], chi[1], chi[2], chi[3]}, dipole, mesh.conductivity(e), sigma_inf.scalar());
      for (int i = 0; i < 4; ++i)
        if (vals[i] != 0.0) rhs.add(verts[i], -vals[i]);
    } else {
      auto vals = transition_term_numeric(mesh, e, chi, sigma_inf, dipole, transition_order);
      accumulate(rhs, verts, vals, -1.0);
    }
  }

  // Surface term over the patch boundary; the order grows as faces approach
  // the source so the discrete functional stays zero-sum (the closed-surface
  // flux identity). Quadrature cannot deliver that identity once the source
  // sits within a fraction of an edge length of a face (zero-extension
  // patches), so the known-exact total flux of the near faces is restored by
  // a compatibility correction distributed over them.
  const int surface_base = is_tet ? 26 : 14;
  {
    struct FaceVals {
      const mesh::BoundaryFace* bf;
      std::vector<double> vals;
      double ratio;
      double area;
    };
    std::vector<FaceVals> faces;
    faces.reserve(patch.boundary_faces.size());
    double defect = 0.0;
    for (const auto& bf : patch.boundary_faces) {
      FaceVals fv;
      fv.bf = &bf;
      int order;
      surface_face_metrics(mesh, bf.element, bf.local_face, dipole.position, surface_base, order,
                           fv.ratio);
      if (bf.element == patch.source_element) fv.ratio = 0.0;  // own faces of the source
      fv.vals = surface_term_numeric(mesh, bf.element, bf.local_face, bf.normal, sigma_inf,
                                     dipole, order);
      fv.area = mesh.face_area(bf.element, bf.local_face);
      for (double v : fv.vals) defect += v;
      faces.push_back(std::move(fv));
    }
    double near_area = 0.0;
    for (const auto& fv : faces)
      if (fv.ratio < 0.25) near_area += fv.area;
    for (auto& fv : faces) {
      if (near_area > 0.0 && fv.ratio < 0.25) {
        double share = defect * fv.area / near_area / static_cast<double>(fv.vals.size());
        for (double& v : fv.vals) v -= share;
      }
      if (is_tet) {
        auto ids = mesh.face_vertices_tet(fv.bf->element, fv.bf->local_face);
        for (int i = 0; i < 3; ++i)
          if (fv.vals[i] != 0.0) rhs.add(ids[i], -fv.vals[i]);
      } else {
        auto ids = mesh.face_vertices_hex(fv.bf->element, fv.bf->local_face);
        for (int i = 0; i < 4; ++i)
          if (fv.vals[i] != 0.0) rhs.add(ids[i], -fv.vals[i]);
      }
    }
  }

  // patch term
  const int hex_patch_order =
      quad::fixed_orders(quad::ElementKind::hex, quad::Problem::eeg, quad::SingularTerm::patch);
  for (int e : patch.patch_elements) {
    Mat3 sigma_c = mesh.conductivity(e) - sigma_inf.tensor();
    if (effectively_zero(sigma_c, sigma_inf.tensor())) continue;
    int order = is_tet ? tet_patch_order(mesh, e, dipole.position, report) : hex_patch_order;
    auto vals = patch_term_numeric(mesh, e, sigma_c, sigma_inf, dipole, order);
    accumulate(rhs, mesh.element(e), vals, -1.0);
  }

  rhs.compress();
  return rhs;
}

SparseVector assemble_rhs_full_subtraction(const Mesh& mesh, const Dipole& dipole,
                                           RhsReport* report) {
  const bool is_tet = mesh.kind() == ElementKind::tet;
  int src = find_source_element(mesh, dipole.position);
  HomogeneousConductivity sigma_inf(mesh.conductivity(src));
  if (report) report->source_element = src;

  SparseVector rhs;

  const int surface_base = is_tet ? 26 : 14;
  for (const auto& [e, f] : mesh.boundary_faces()) {
    Vec3 normal = mesh.face_normal(e, f);
    int surface_order;
    double face_ratio;
    surface_face_metrics(mesh, e, f, dipole.position, surface_base, surface_order, face_ratio);
    auto vals = surface_term_numeric(mesh, e, f, normal, sigma_inf, dipole, surface_order);
    if (is_tet) {
      auto fv = mesh.face_vertices_tet(e, f);
      for (int i = 0; i < 3; ++i)
        if (vals[i] != 0.0) rhs.add(fv[i], -vals[i]);
    } else {
      auto fv = mesh.face_vertices_hex(e, f);
      for (int i = 0; i < 4; ++i)
        if (vals[i] != 0.0) rhs.add(fv[i], -vals[i]);
    }
  }

  const int hex_patch_order =
      quad::fixed_orders(quad::ElementKind::hex, quad::Problem::eeg, quad::SingularTerm::patch);
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
    Mat3 sigma_c = mesh.conductivity(e) - sigma_inf.tensor();
    if (effectively_zero(sigma_c, sigma_inf.tensor())) continue;
    int order = is_tet ? tet_patch_order(mesh, e, dipole.position, report) : hex_patch_order;
    auto vals = patch_term_numeric(mesh, e, sigma_c, sigma_inf, dipole, order);
    accumulate(rhs, mesh.element(e), vals, -1.0);
  }

  rhs.compress();
  return rhs;
}

}  // namespace locsub::eeg
