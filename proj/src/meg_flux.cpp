#include "locsub/meg_flux.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "locsub/element_geometry.hpp"
#include "locsub/quadrature.hpp"

namespace locsub::meg {

using fields::Dipole;
using fields::HomogeneousConductivity;
using mesh::ElementKind;
using mesh::Mesh;
using mesh::Patch;

namespace {

Vec3 kernel(const Vec3& coil, const Vec3& y) {
  Vec3 d = coil - y;
  double n = norm(d);
  return d / (n * n * n);
}

double max_abs(const Mat3& t) {
  double m = 0.0;
  for (double v : t.m) m = std::max(m, std::abs(v));
  return m;
}

void require_isotropic(const HomogeneousConductivity& sigma_inf) {
  if (!sigma_inf.isotropic())
    throw std::invalid_argument("boundary subtraction requires isotropic sigma_inf");
}

}  // namespace

void validate_coils(const Mesh& mesh, const std::vector<Coil>& coils) {
  for (const Coil& c : coils) {
    if (mesh.locate_element(c.position))
      throw std::invalid_argument("coil position lies inside the mesh");
    if (c.orientation && std::abs(norm(*c.orientation) - 1.0) > 1e-12)
      throw std::invalid_argument("coil orientation must be unit length");
  }
}

CorrectionLeads::CorrectionLeads(const Mesh& mesh, const std::vector<Coil>& coils, int order) {
  validate_coils(mesh, coils);
  coils_ = coils.size();
  vertices_ = mesh.num_vertices();
  data_.assign(coils_ * 3 * vertices_, 0.0);

  auto row = [&](std::size_t c, int comp) { return data_.data() + (c * 3 + comp) * vertices_; };

  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
    auto verts = mesh.element(e);
    const Mat3& sigma = mesh.conductivity(e);
    if (mesh.kind() == ElementKind::tet) {
      geom::TetGeom g({mesh.vertex(verts[0]), mesh.vertex(verts[1]), mesh.vertex(verts[2]),
                       mesh.vertex(verts[3])});
      auto rule = quad::simplex_rule(3, order);
      std::array<Vec3, 4> sg;
      for (int i = 0; i < 4; ++i) sg[i] = sigma * g.grad[i];
      for (std::size_t q = 0; q < rule->size(); ++q) {
        double w = rule->weights[q] * g.abs_det;
        for (std::size_t c = 0; c < coils_; ++c) {
          Vec3 k = w * kernel(coils[c].position, g.map(rule->points[q]));
          for (int i = 0; i < 4; ++i) {
            Vec3 contrib = cross(sg[i], k);
            for (int comp = 0; comp < 3; ++comp) row(c, comp)[verts[i]] += contrib[comp];
          }
        }
      }
    } else {
      geom::BoxGeom g(mesh.vertex(verts[0]), mesh.vertex(verts[7]));
      auto rule = quad::cube_rule(3, order);
      for (std::size_t q = 0; q < rule->size(); ++q) {
        auto grads = g.basis_grad(rule->points[q]);
        double w = rule->weights[q] * g.abs_det;
        for (std::size_t c = 0; c < coils_; ++c) {
          Vec3 k = w * kernel(coils[c].position, g.map(rule->points[q]));
          for (int i = 0; i < 8; ++i) {
            Vec3 contrib = cross(sigma * grads[i], k);
            for (int comp = 0; comp < 3; ++comp) row(c, comp)[verts[i]] += contrib[comp];
          }
        }
      }
    }
  }
}

Vec3 CorrectionLeads::apply(std::size_t coil, const std::vector<double>& u_c) const {
  if (coil >= coils_) throw std::out_of_range("coil index");
  if (u_c.size() != vertices_) throw std::invalid_argument("coefficient vector size mismatch");
  Vec3 out{};
  for (int comp = 0; comp < 3; ++comp) {
    const double* r = data_.data() + (coil * 3 + comp) * vertices_;
    double s = 0.0;
    for (std::size_t v = 0; v < vertices_; ++v) s += r[v] * u_c[v];
    out[comp] = s;
  }
  return out;
}

Vec3 correction_field_direct(const Mesh& mesh, const std::vector<double>& u_c, const Vec3& coil,
                             int order) {
  if (u_c.size() != mesh.num_vertices())
    throw std::invalid_argument("coefficient vector size mismatch");
  Vec3 out{};
  if (mesh.kind() == ElementKind::tet) {
    auto rule = quad::simplex_rule(3, order);
    for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
      auto verts = mesh.element(e);
      geom::TetGeom g({mesh.vertex(verts[0]), mesh.vertex(verts[1]), mesh.vertex(verts[2]),
                       mesh.vertex(verts[3])});
      Vec3 grad_u{};
      for (int i = 0; i < 4; ++i) grad_u += u_c[verts[i]] * g.grad[i];
      Vec3 sgrad = mesh.conductivity(e) * grad_u;  // constant on the element
      Vec3 kint{};
      for (std::size_t q = 0; q < rule->size(); ++q)
        kint += (rule->weights[q] * g.abs_det) * kernel(coil, g.map(rule->points[q]));
      out += cross(sgrad, kint);
    }
  } else {
    auto rule = quad::cube_rule(3, order);
    for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
      auto verts = mesh.element(e);
      geom::BoxGeom g(mesh.vertex(verts[0]), mesh.vertex(verts[7]));
      const Mat3& sigma = mesh.conductivity(e);
      for (std::size_t q = 0; q < rule->size(); ++q) {
        auto grads = g.basis_grad(rule->points[q]);
        Vec3 grad_u{};
        for (int i = 0; i < 8; ++i) grad_u += u_c[verts[i]] * grads[i];
        out += (rule->weights[q] * g.abs_det) *
               cross(sigma * grad_u, kernel(coil, g.map(rule->points[q])));
      }
    }
  }
  return out;
}

Vec3 patch_flux_numeric(const Mesh& mesh, int element, const Mat3& sigma_c,
                        const HomogeneousConductivity& sigma_inf, const Dipole& dipole,
                        const Vec3& coil, int order) {
  Vec3 out{};
  if (max_abs(sigma_c) <= 1e-14 * max_abs(sigma_inf.tensor())) return out;
  auto verts = mesh.element(element);
  if (mesh.kind() == ElementKind::tet) {
    geom::TetGeom g({mesh.vertex(verts[0]), mesh.vertex(verts[1]), mesh.vertex(verts[2]),
                     mesh.vertex(verts[3])});
    auto rule = quad::simplex_rule(3, order);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      Vec3 x = g.map(rule->points[q]);
      out += (rule->weights[q] * g.abs_det) *
             cross(sigma_c * fields::grad_u_infinity(sigma_inf, dipole, x), kernel(coil, x));
    }
  } else {
    geom::BoxGeom g(mesh.vertex(verts[0]), mesh.vertex(verts[7]));
    auto rule = quad::cube_rule(3, order);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      Vec3 x = g.map(rule->points[q]);
      out += (rule->weights[q] * g.abs_det) *
             cross(sigma_c * fields::grad_u_infinity(sigma_inf, dipole, x), kernel(coil, x));
    }
  }
  return out;
}

Vec3 transition_flux_numeric(const Mesh& mesh, int element, const std::vector<double>& chi_values,
                             const HomogeneousConductivity& sigma_inf, const Dipole& dipole,
                             const Vec3& coil, int order) {
  if (static_cast<int>(chi_values.size()) != mesh.vertices_per_element())
    throw std::invalid_argument("chi_values size does not match the element");
  if (mesh.contains(element, dipole.position, 1e-12))
    throw std::domain_error("transition integrand is singular: x0 inside the element");
  const Mat3& sigma = mesh.conductivity(element);
  auto verts = mesh.element(element);
  Vec3 out{};
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
      Vec3 field = sigma * (fields::u_infinity(sigma_inf, dipole, x) * grad_chi +
                            chi * fields::grad_u_infinity(sigma_inf, dipole, x));
      out += (rule->weights[q] * g.abs_det) * cross(field, kernel(coil, x));
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
      Vec3 field = sigma * (fields::u_infinity(sigma_inf, dipole, x) * grad_chi +
                            chi * fields::grad_u_infinity(sigma_inf, dipole, x));
      out += (rule->weights[q] * g.abs_det) * cross(field, kernel(coil, x));
    }
  }
  return out;
}

Vec3 surface_flux_numeric(const Mesh& mesh, int element, int local_face, const Vec3& normal,
                          const HomogeneousConductivity& sigma_inf, const Dipole& dipole,
                          const Vec3& coil, int order) {
  require_isotropic(sigma_inf);
  const double s_inf = sigma_inf.scalar();
  Vec3 out{};
  if (mesh.kind() == ElementKind::tet) {
    auto fv = mesh.face_vertices_tet(element, local_face);
    geom::TriFace face({mesh.vertex(fv[0]), mesh.vertex(fv[1]), mesh.vertex(fv[2])});
    auto rule = quad::simplex_rule(2, order);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      Vec3 x = face.map(rule->points[q].x, rule->points[q].y);
      double u = fields::u_infinity(sigma_inf, dipole, x);
      out += (rule->weights[q] * face.area_factor * s_inf * u) * cross(normal, kernel(coil, x));
    }
  } else {
    auto fv = mesh.face_vertices_hex(element, local_face);
    geom::QuadFace face(
        {mesh.vertex(fv[0]), mesh.vertex(fv[1]), mesh.vertex(fv[2]), mesh.vertex(fv[3])});
    auto rule = quad::cube_rule(2, order);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      Vec3 x = face.map(rule->points[q].x, rule->points[q].y);
      double u = fields::u_infinity(sigma_inf, dipole, x);
      out += (rule->weights[q] * face.area_factor * s_inf * u) * cross(normal, kernel(coil, x));
    }
  }
  return out;
}

Vec3 secondary_field(const Mesh& mesh, const Patch& patch, const Dipole& dipole,
                     const std::vector<double>& u_c, const Coil& coil,
                     const CorrectionLeads* leads, std::size_t coil_index) {
  const bool is_tet = mesh.kind() == ElementKind::tet;
  HomogeneousConductivity sigma_inf(mesh.conductivity(patch.source_element));
  require_isotropic(sigma_inf);

  Vec3 sum = leads ? leads->apply(coil_index, u_c)
                   : correction_field_direct(mesh, u_c, coil.position);

  const int surface_order = quad::fixed_orders(
      is_tet ? quad::ElementKind::tet : quad::ElementKind::hex, quad::Problem::meg,
      quad::SingularTerm::surface);
  const int transition_order = quad::fixed_orders(
      is_tet ? quad::ElementKind::tet : quad::ElementKind::hex, quad::Problem::meg,
      quad::SingularTerm::transition);
  const int hex_patch_order =
      is_tet ? 0
             : quad::fixed_orders(quad::ElementKind::hex, quad::Problem::meg,
                                  quad::SingularTerm::patch);

  for (int e : patch.patch_elements) {
    Mat3 sigma_c = mesh.conductivity(e) - sigma_inf.tensor();
    if (max_abs(sigma_c) <= 1e-14 * max_abs(sigma_inf.tensor())) continue;
    int order;
    if (is_tet) {
      double ratio = mesh::distance_edge_ratio(mesh, e, dipole.position);
      order = ratio >= 1.0 / 6.0 ? quad::select_tet_patch_order(ratio) : 20;
    } else {
      order = hex_patch_order;
    }
    sum += patch_flux_numeric(mesh, e, sigma_c, sigma_inf, dipole, coil.position, order);
  }

  for (const auto& bf : patch.boundary_faces)
    sum += surface_flux_numeric(mesh, bf.element, bf.local_face, bf.normal, sigma_inf, dipole,
                                coil.position, surface_order);

  std::vector<double> chi(mesh.vertices_per_element());
  for (int e : patch.transition_elements) {
    auto verts = mesh.element(e);
    for (int i = 0; i < mesh.vertices_per_element(); ++i) chi[i] = patch.chi(verts[i]);
    sum += transition_flux_numeric(mesh, e, chi, sigma_inf, dipole, coil.position,
                                   transition_order);
  }

  return (-fields::kMu0 / (4.0 * std::numbers::pi)) * sum;
}

TotalField total_field(const Vec3& primary, const Vec3& secondary, const Coil& coil) {
  TotalField out;
  out.field = primary + secondary;
  if (coil.orientation) out.along_orientation = dot(out.field, *coil.orientation);
  return out;
}

}  // namespace locsub::meg
