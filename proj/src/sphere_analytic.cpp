#include "locsub/sphere_analytic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace locsub::analytic {

using fields::Dipole;

EegSeriesResult sphere_eeg_analytic(const mesh::SphereModel& model, const Dipole& dipole,
                                    const std::vector<Vec3>& points_m) {
  constexpr int kMaxTerms = 1000;
  constexpr double kStopRatio = 1e-10;
  constexpr double kFailRatio = 1e-6;

  std::array<double, 4> r;  // interface radii in meters
  for (int i = 0; i < 4; ++i) r[i] = 1e-3 * model.layer_radii_mm[i];
  const auto& sig = model.layer_conductivities;
  const Vec3 center = 1e-3 * model.center_mm;

  Vec3 b_vec = dipole.position - center;
  double b = norm(b_vec);
  if (!(b < r[0] - 1e-9)) throw std::invalid_argument("dipole must lie strictly inside the innermost layer");

  // moment split into radial and tangential parts along the dipole axis
  Vec3 b_hat = b > 0.0 ? b_vec / b : Vec3{0.0, 0.0, 1.0};
  double m_r = dot(dipole.moment, b_hat);
  Vec3 tang = dipole.moment - m_r * b_hat;
  double m_t = norm(tang);
  Vec3 t_hat = m_t > 1e-300 * (norm(dipole.moment) + 1.0) ? tang / m_t : Vec3{};

  const std::size_t np = points_m.size();
  EegSeriesResult res;
  res.potentials.assign(np, 0.0);
  if (np == 0) return res;

  struct PointState {
    double x;       // cos(angle to dipole axis)
    double s;       // <point_dir, t_hat>
    double radius;  // clamped to the outer surface
    int layer;      // 0-based layer index
    double p_prev = 1.0, p_cur;    // P_{n-1}, P_n
    double dp_prev = 0.0, dp_cur;  // P'_{n-1}, P'_n
  };
  std::vector<PointState> pts(np);
  for (std::size_t i = 0; i < np; ++i) {
    Vec3 d = points_m[i] - center;
    double rad = norm(d);
    if (rad <= b) throw std::invalid_argument("evaluation point below the dipole radius");
    rad = std::min(rad, r[3]);
    Vec3 dir = d / norm(d);
    pts[i].x = std::clamp(dot(dir, b_hat), -1.0, 1.0);
    pts[i].s = dot(dir, t_hat);
    pts[i].radius = rad;
    pts[i].layer = 3;
    for (int l = 0; l < 4; ++l)
      if (rad <= r[l] * (1.0 + 1e-14)) {
        pts[i].layer = l;
        break;
      }
    pts[i].p_cur = pts[i].x;  // P_1
    pts[i].dp_cur = 1.0;      // P_1'
  }

  const double source_scale = 1.0 / (4.0 * std::numbers::pi * sig[0]);
  double ratio = 1.0;
  int quiet = 0;

  for (int n = 1; n <= kMaxTerms; ++n) {
    // outer layer: zero Neumann trace at r[3]
    double a4 = (n + 1.0) / n, b4 = 1.0;
    std::array<double, 4> ak{}, bk{};
    ak[3] = a4;
    bk[3] = b4;
    for (int k = 2; k >= 1; --k) {
      double rho = r[k] / r[k + 1];
      double rho_pow = std::pow(rho, n);
      double inv_pow = std::pow(r[k + 1] / r[k], n + 1);
      double U = ak[k + 1] * rho_pow + bk[k + 1] * inv_pow;
      double J = sig[k + 1] * (n * ak[k + 1] * rho_pow - (n + 1.0) * bk[k + 1] * inv_pow) / r[k];
      ak[k] = ((n + 1.0) * U + J * r[k] / sig[k]) / (2.0 * n + 1.0);
      bk[k] = (n * U - J * r[k] / sig[k]) / (2.0 * n + 1.0);
    }
    double rho1 = r[0] / r[1];
    double rho1_pow = std::pow(rho1, n);
    double inv1_pow = std::pow(r[1] / r[0], n + 1);
    double U_t = ak[1] * rho1_pow + bk[1] * inv1_pow;
    double J_t = sig[1] * (n * ak[1] * rho1_pow - (n + 1.0) * bk[1] * inv1_pow) / r[0];

    double g1 = std::pow(b / r[0], n - 1) / (r[0] * r[0]);  // b^{n-1}/r1^{n+1}
    double denom = r[0] * J_t - sig[0] * n * U_t;
    double tau = -sig[0] * (2.0 * n + 1.0) * g1 / denom;
    double A1 = tau * U_t - g1;  // layer-0 regular coefficient, scaled by (r/r1)^n

    double max_ratio = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
      PointState& p = pts[i];
      double radial;
      if (p.layer == 0) {
        double g = std::pow(b / p.radius, n - 1) / (p.radius * p.radius);
        radial = g + A1 * std::pow(p.radius / r[0], n);
      } else {
        int k = p.layer;
        radial = tau * (ak[k] * std::pow(p.radius / r[k], n) +
                        bk[k] * std::pow(r[k] / p.radius, n + 1));
      }
      double term = source_scale * radial * (n * m_r * p.p_cur + m_t * p.dp_cur * p.s);
      res.potentials[i] += term;
      double denom_abs = std::max(std::abs(res.potentials[i]), 1e-300);
      max_ratio = std::max(max_ratio, std::abs(term) / denom_abs);

      // advance Legendre recurrences to degree n+1
      double p_next = ((2.0 * n + 1.0) * p.x * p.p_cur - n * p.p_prev) / (n + 1.0);
      double dp_next = p.dp_prev + (2.0 * n + 1.0) * p.p_cur;
      p.p_prev = p.p_cur;
      p.p_cur = p_next;
      p.dp_prev = p.dp_cur;
      p.dp_cur = dp_next;
    }
    ratio = max_ratio;
    res.terms = n;
    quiet = ratio < kStopRatio ? quiet + 1 : 0;
    if (quiet >= 3) break;
  }
  res.converged = !(res.terms >= kMaxTerms && ratio > kFailRatio);
  return res;
}

Vec3 sphere_meg_analytic(const Dipole& dipole, const Vec3& center_m, const Vec3& coil_m) {
  Vec3 r0 = dipole.position - center_m;
  Vec3 r = coil_m - center_m;
  double rn = norm(r);
  if (rn <= 1e-14) throw std::domain_error("coil at the sphere center");
  Vec3 a_vec = r - r0;
  double a = norm(a_vec);
  if (a <= 1e-14) throw std::domain_error("coil at the dipole position");
  double F = a * (rn * a + rn * rn - dot(r0, r));
  if (F == 0.0) throw std::domain_error("degenerate coil-dipole geometry");
  double ar = dot(a_vec, r);
  Vec3 gradF = (a * a / rn + ar / a + 2.0 * a + 2.0 * rn) * r - (a + 2.0 * rn + ar / a) * r0;
  Vec3 q_x_r0 = cross(dipole.moment, r0);
  return (fields::kMu0 / (4.0 * std::numbers::pi * F * F)) * (F * q_x_r0 - dot(q_x_r0, r) * gradF);
}

std::vector<Vec3> sphere_meg_analytic(const Dipole& dipole, const Vec3& center_m,
                                      const std::vector<meg::Coil>& coils) {
  std::vector<Vec3> out;
  out.reserve(coils.size());
  for (const auto& c : coils) out.push_back(sphere_meg_analytic(dipole, center_m, c.position));
  return out;
}

std::vector<Vec3> fibonacci_points(int n, double radius, const Vec3& center) {
  if (n < 1) throw std::invalid_argument("fibonacci_points: n must be >= 1");
  std::vector<Vec3> out;
  out.reserve(n);
  if (n == 1) {
    out.push_back(center + Vec3{0.0, 0.0, radius});
    return out;
  }
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - (2.0 * i + 1.0) / n;
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden_angle * i;
    out.push_back(center + radius * Vec3{rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return out;
}

SensorLayout SensorLayout::for_sphere(const mesh::SphereModel& model, int n_electrodes,
                                      int n_coils, double coil_radius_mm) {
  if (!(coil_radius_mm > model.layer_radii_mm[3]))
    throw std::invalid_argument("coil radius must exceed the outer sphere radius");
  SensorLayout layout;
  Vec3 center = 1e-3 * model.center_mm;
  layout.electrodes_m = fibonacci_points(n_electrodes, 1e-3 * model.layer_radii_mm[3], center);
  for (const Vec3& p : fibonacci_points(n_coils, 1e-3 * coil_radius_mm, center))
    layout.coils.push_back({p, normalized(p - center)});
  return layout;
}

std::vector<Vec3> load_points_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sensor file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  std::vector<Vec3> out;
  for (const auto& p : j)
    out.push_back(1e-3 * Vec3{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
  return out;
}

void save_points_json(const std::vector<Vec3>& points_m, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const Vec3& p : points_m) j.push_back({p.x * 1e3, p.y * 1e3, p.z * 1e3});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sensor file: " + path);
  out << j.dump() << "\n";
}

}  // namespace locsub::analytic
