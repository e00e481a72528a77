#include "locsub/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "locsub/cg.hpp"
#include "locsub/element_geometry.hpp"
#include "locsub/face_geometry.hpp"
#include "locsub/meg_flux.hpp"
#include "locsub/patch.hpp"
#include "locsub/quadrature.hpp"
#include "locsub/rhs_assembly.hpp"
#include "locsub/stiffness.hpp"
#include "locsub/transfer.hpp"

namespace locsub::study {

using fields::Dipole;
using fields::HomogeneousConductivity;
using mesh::Mesh;
using mesh::Patch;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Quartiles {
  double q1 = std::nan(""), median = std::nan(""), q3 = std::nan("");
  int n = 0;
};

Quartiles quartiles(std::vector<double> v) {
  Quartiles q;
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  q.n = static_cast<int>(v.size());
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double frac) {
    double pos = frac * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double w = pos - lo;
    return (1.0 - w) * v[lo] + w * v[hi];
  };
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  return q;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xbf58476d1ce4e5b9ULL);
  h ^= h >> 31;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 29;
  return h;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v{n(rng), n(rng), n(rng)};
  while (norm(v) < 1e-8) v = {n(rng), n(rng), n(rng)};
  return normalized(v);
}

}  // namespace

std::vector<double> StudyConfig::default_eccentricities() {
  // 10 logarithmic steps of 1 - ecc from 0.8803 to 0.9900
  std::vector<double> out;
  double lo = std::log(1.0 - 0.8803), hi = std::log(1.0 - 0.99);
  for (int i = 0; i < 10; ++i) out.push_back(1.0 - std::exp(lo + (hi - lo) * i / 9.0));
  return out;
}

std::vector<DipoleSample> make_dipoles(const mesh::SphereModel& sphere, double eccentricity,
                                       int count, Orientation orientation, std::uint64_t seed) {
  if (!(eccentricity > 0.0 && eccentricity < 1.0))
    throw std::invalid_argument("eccentricity must lie in (0,1)");
  double radius_m = 1e-3 * sphere.layer_radii_mm[0] * eccentricity;
  Vec3 center = 1e-3 * sphere.center_mm;
  auto base = analytic::fibonacci_points(count, radius_m, center);
  double jitter = 0.35 * std::sqrt(4.0 * std::numbers::pi / count);  // radians

  std::vector<DipoleSample> out(count);
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(eccentricity * 1e9), i));
    Vec3 dir = normalized(base[i] - center);
    Vec3 axis = random_unit(rng);
    Vec3 tang = axis - dot(axis, dir) * dir;
    while (norm(tang) < 1e-6) {
      axis = random_unit(rng);
      tang = axis - dot(axis, dir) * dir;
    }
    tang = normalized(tang);
    double angle = jitter * std::generate_canonical<double, 53>(rng);
    Vec3 jdir = normalized(std::cos(angle) * dir + std::sin(angle) * tang);
    out[i].position_m = center + radius_m * jdir;

    if (orientation == Orientation::radial) {
      out[i].moment = jdir;
    } else {
      Vec3 t = random_unit(rng);
      Vec3 tt = t - dot(t, jdir) * jdir;
      while (norm(tt) < 1e-6) {
        t = random_unit(rng);
        tt = t - dot(t, jdir) * jdir;
      }
      out[i].moment = normalized(tt);
    }
  }
  return out;
}

double relative_error(const std::vector<double>& numeric, const std::vector<double>& analytic,
                      ProblemKind kind) {
  if (numeric.size() != analytic.size() || numeric.empty())
    throw std::invalid_argument("relative_error: size mismatch");
  std::vector<double> num = numeric, ana = analytic;
  if (kind == ProblemKind::eeg) {
    solver::zero_mean(num);
    solver::zero_mean(ana);
  }
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    diff += (num[i] - ana[i]) * (num[i] - ana[i]);
    ref += ana[i] * ana[i];
  }
  if (ref == 0.0) throw std::invalid_argument("relative_error: analytic reference is zero");
  return std::sqrt(diff / ref);
}

double relative_error_vec(const std::vector<Vec3>& numeric, const std::vector<Vec3>& analytic) {
  if (numeric.size() != analytic.size() || numeric.empty())
    throw std::invalid_argument("relative_error: size mismatch");
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    diff += norm2(numeric[i] - analytic[i]);
    ref += norm2(analytic[i]);
  }
  if (ref == 0.0) throw std::invalid_argument("relative_error: analytic reference is zero");
  return std::sqrt(diff / ref);
}

namespace {

Mesh build_study_mesh(const StudyConfig& c) {
  if (!c.mesh_file.empty()) {
    if (c.mesh_file.size() > 4 && c.mesh_file.substr(c.mesh_file.size() - 4) == ".msh") {
      if (c.conductivities_file.empty())
        throw std::invalid_argument("a .msh mesh needs a conductivity map file");
      std::ifstream in(c.conductivities_file);
      if (!in) throw std::runtime_error("cannot open " + c.conductivities_file);
      nlohmann::json j = nlohmann::json::parse(in);
      std::map<int, Mat3> tags;
      for (auto& [key, val] : j.items()) {
        if (val.is_number())
          tags[std::stoi(key)] = Mat3::identity(val.get<double>());
        else {
          Mat3 t;
          for (int i = 0; i < 9; ++i) t.m[i] = val[i].get<double>();
          tags[std::stoi(key)] = t;
        }
      }
      return mesh::load_gmsh_ascii(c.mesh_file, tags);
    }
    return mesh::load_mesh_json(c.mesh_file);
  }
  Mesh hex = mesh::generate_voxel_sphere(c.sphere, c.h_mm);
  if (c.element_kind == mesh::ElementKind::hex) return hex;
  return mesh::split_hex_to_tet(hex);
}

struct SensorSet {
  std::vector<Vec3> electrodes_m;
  std::vector<meg::Coil> coils;
};

SensorSet build_sensors(const StudyConfig& c) {
  SensorSet s;
  if (!c.electrodes_file.empty()) {
    s.electrodes_m = analytic::load_points_json(c.electrodes_file);
  } else {
    s.electrodes_m =
        analytic::fibonacci_points(c.n_electrodes, 1e-3 * c.sphere.layer_radii_mm[3],
                                   1e-3 * c.sphere.center_mm);
  }
  Vec3 center = 1e-3 * c.sphere.center_mm;
  if (!c.coils_file.empty()) {
    for (const Vec3& p : analytic::load_points_json(c.coils_file))
      s.coils.push_back({p, normalized(p - center)});
  } else {
    for (const Vec3& p :
         analytic::fibonacci_points(c.n_coils, 1e-3 * c.coil_radius_mm, center))
      s.coils.push_back({p, normalized(p - center)});
  }
  return s;
}

solver::CgOptions solver_options(const StudyConfig& c) {
  solver::CgOptions opts;
  opts.tol = c.solver_tol;
  opts.preconditioner = c.use_ic0 ? solver::Preconditioner::ic0 : solver::Preconditioner::jacobi;
  return opts;
}

/// Shared per-run state for the sphere and extension studies.
struct ForwardContext {
  const StudyConfig& config;
  Mesh mesh;
  solver::CsrMatrix K;
  solver::CgOptions cg;
  SensorSet sensors;
  std::vector<int> electrode_vertices;
  std::vector<Vec3> electrode_eval_m;  // snapped, radius clamped onto the sphere
  std::optional<solver::TransferMatrix> transfer;

  explicit ForwardContext(const StudyConfig& c)
      : config(c), mesh(build_study_mesh(c)), K(eeg::assemble_stiffness(mesh)),
        cg(solver_options(c)), sensors(build_sensors(c)) {
    electrode_vertices = solver::map_electrodes_to_vertices(mesh, sensors.electrodes_m);
    Vec3 center = 1e-3 * c.sphere.center_mm;
    double R = 1e-3 * c.sphere.layer_radii_mm[3];
    for (int v : electrode_vertices) {
      Vec3 d = mesh.vertex(v) - center;
      double r = norm(d);
      electrode_eval_m.push_back(center + (r > R ? R / r : 1.0) * d);
    }
    if (c.problem == ProblemKind::meg) meg::validate_coils(mesh, sensors.coils);
    if (c.use_transfer && c.problem == ProblemKind::eeg)
      transfer = solver::compute_transfer(K, mesh, sensors.electrodes_m, cg);
  }
};

struct DipoleOutcome {
  std::string status = "ok";
  double error = std::nan("");
  double field_norm = 0.0;
  double assembly_s = 0.0;
  double solve_s = 0.0;
};

DipoleOutcome run_one_dipole(const ForwardContext& ctx, const DipoleSample& sample,
                             Approach approach, int n_extensions, bool radial_meg) {
  DipoleOutcome out;
  const Mesh& mesh = ctx.mesh;
  Dipole dipole{sample.position_m, sample.moment};

  solver::SparseVector rhs;
  Patch patch;
  double t0 = now_seconds();
  try {
    if (approach == Approach::localized) {
      patch = mesh::build_patch(mesh, dipole.position, n_extensions);
      rhs = eeg::assemble_rhs_localized(mesh, patch, dipole);
    } else {
      patch = mesh::build_patch(mesh, dipole.position, 1 << 30);  // exhaustive chi = 1
      rhs = eeg::assemble_rhs_full_subtraction(mesh, dipole);
    }
  } catch (const std::invalid_argument&) {
    out.status = "placement_error";
    return out;
  }
  out.assembly_s = now_seconds() - t0;

  t0 = now_seconds();
  std::vector<double> u_c;
  std::vector<double> sensor_uc;  // transfer route: u_c differences at electrodes
  try {
    if (ctx.transfer && ctx.config.problem == ProblemKind::eeg) {
      sensor_uc = ctx.transfer->apply(rhs);
    } else {
      u_c = solver::cg_solve(ctx.K, rhs.to_dense(ctx.K.rows()), ctx.cg).x;
    }
  } catch (const std::exception&) {
    out.status = "solver_error";
    return out;
  }
  out.solve_s = now_seconds() - t0;

  if (ctx.config.problem == ProblemKind::eeg) {
    std::vector<double> num(ctx.electrode_vertices.size());
    HomogeneousConductivity sigma_inf(mesh.conductivity(patch.source_element));
    for (std::size_t i = 0; i < ctx.electrode_vertices.size(); ++i) {
      int v = ctx.electrode_vertices[i];
      double chi = patch.chi(v);
      num[i] = sensor_uc.empty() ? u_c[v] : sensor_uc[i];
      if (chi != 0.0) num[i] += chi * fields::u_infinity(sigma_inf, dipole, mesh.vertex(v));
    }
    auto ana = analytic::sphere_eeg_analytic(ctx.config.sphere, dipole, ctx.electrode_eval_m);
    out.error = relative_error(num, ana.potentials, ProblemKind::eeg);
    double nn = 0.0;
    for (double v : solver::zero_meaned(num)) nn += v * v;
    out.field_norm = std::sqrt(nn);
  } else {
    std::vector<Vec3> num(ctx.sensors.coils.size());
    for (std::size_t i = 0; i < ctx.sensors.coils.size(); ++i) {
      Vec3 bs = meg::secondary_field(mesh, patch, dipole, u_c, ctx.sensors.coils[i]);
      num[i] = fields::primary_B(dipole, ctx.sensors.coils[i].position) + bs;
    }
    double nn = 0.0;
    for (const Vec3& v : num) nn += norm2(v);
    out.field_norm = std::sqrt(nn);
    if (!radial_meg) {
      auto ana = analytic::sphere_meg_analytic(dipole, 1e-3 * ctx.config.sphere.center_mm,
                                               ctx.sensors.coils);
      out.error = relative_error_vec(num, ana);
    }
  }
  return out;
}

const char* kSphereHeader =
    "dipole_index,eccentricity,px_mm,py_mm,pz_mm,mx,my,mz,orientation,approach,n_extensions,"
    "status,error,field_norm,assembly_s,solve_s";

void write_row(std::ofstream& os, const StudyConfig& c, int index, double ecc,
               const DipoleSample& s, Orientation orientation, const std::string& approach,
               int n_extensions, const DipoleOutcome& o) {
  os << index << ',' << fmt17(ecc) << ',' << fmt17(s.position_m.x * 1e3) << ','
     << fmt17(s.position_m.y * 1e3) << ',' << fmt17(s.position_m.z * 1e3) << ','
     << fmt17(s.moment.x) << ',' << fmt17(s.moment.y) << ',' << fmt17(s.moment.z) << ','
     << (orientation == Orientation::radial ? "radial" : "tangential") << ',' << approach << ','
     << n_extensions << ',' << o.status << ',' << fmt17(o.error) << ',' << fmt17(o.field_norm)
     << ',' << fmt17(c.include_timings ? o.assembly_s : 0.0) << ','
     << fmt17(c.include_timings ? o.solve_s : 0.0) << '\n';
}

/// Run a dipole set through a worker pool, results in dipole-index order.
std::vector<DipoleOutcome> run_pool(const ForwardContext& ctx,
                                    const std::vector<DipoleSample>& dipoles, Approach approach,
                                    int n_extensions, bool radial_meg) {
  std::vector<DipoleOutcome> results(dipoles.size());
  int nthreads = std::max(1, ctx.config.threads);
  if (nthreads == 1) {
    for (std::size_t i = 0; i < dipoles.size(); ++i)
      results[i] = run_one_dipole(ctx, dipoles[i], approach, n_extensions, radial_meg);
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= dipoles.size()) return;
      results[i] = run_one_dipole(ctx, dipoles[i], approach, n_extensions, radial_meg);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

nlohmann::ordered_json group_summary(const std::vector<DipoleOutcome>& outcomes) {
  std::vector<double> errors, norms;
  int failed = 0;
  for (const auto& o : outcomes) {
    if (o.status != "ok") {
      ++failed;
      continue;
    }
    errors.push_back(o.error);
    norms.push_back(o.field_norm);
  }
  auto qe = quartiles(errors);
  auto qn = quartiles(norms);
  nlohmann::ordered_json j;
  j["n_ok"] = static_cast<int>(outcomes.size()) - failed;
  j["n_failed"] = failed;
  j["error_median"] = qe.median;
  j["error_q1"] = qe.q1;
  j["error_q3"] = qe.q3;
  j["field_norm_median"] = qn.median;
  return j;
}

void write_summary(const std::string& out_path, nlohmann::ordered_json body) {
  std::ofstream os(out_path + ".summary.json");
  os << body.dump(2) << "\n";
}

}  // namespace

int run_sphere_study(const StudyConfig& config) {
  try {
    ForwardContext ctx(config);
    auto eccs = config.eccentricities.empty() ? StudyConfig::default_eccentricities()
                                              : config.eccentricities;
    bool radial_meg =
        config.problem == ProblemKind::meg && config.orientation == Orientation::radial;
    if (radial_meg)
      std::fprintf(stderr,
                   "warning: radial dipoles are silent sources for MEG in a spherical conductor; "
                   "reporting field magnitudes instead of relative errors\n");

    std::ofstream os(config.out_path);
    if (!os) throw std::runtime_error("cannot write " + config.out_path);
    os << "# schema locsub-sphere-1\n" << kSphereHeader << '\n';

    nlohmann::ordered_json summary;
    summary["schema"] = "locsub-summary-1";
    summary["groups"] = nlohmann::ordered_json::array();
    const std::string approach =
        config.approach == Approach::localized ? "localized" : "full";

    int index = 0;
    for (std::size_t ei = 0; ei < eccs.size(); ++ei) {
      auto dipoles = make_dipoles(config.sphere, eccs[ei], config.dipoles_per_eccentricity,
                                  config.orientation, config.seed);
      auto outcomes = run_pool(ctx, dipoles, config.approach, config.n_extensions, radial_meg);
      for (std::size_t i = 0; i < dipoles.size(); ++i)
        write_row(os, config, index++, eccs[ei], dipoles[i], config.orientation, approach,
                  config.n_extensions, outcomes[i]);
      auto g = group_summary(outcomes);
      g["eccentricity"] = eccs[ei];
      g["approach"] = approach;
      g["n_extensions"] = config.n_extensions;
      summary["groups"].push_back(g);
    }
    write_summary(config.out_path, summary);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}

int run_extension_study(const StudyConfig& config) {
  try {
    ForwardContext ctx(config);
    double ecc = config.eccentricities.empty() ? 0.95 : config.eccentricities.front();
    bool radial_meg =
        config.problem == ProblemKind::meg && config.orientation == Orientation::radial;
    auto dipoles = make_dipoles(config.sphere, ecc, config.dipoles_per_eccentricity,
                                config.orientation, config.seed);

    std::ofstream os(config.out_path);
    if (!os) throw std::runtime_error("cannot write " + config.out_path);
    os << "# schema locsub-extension-1\n" << kSphereHeader << '\n';

    nlohmann::ordered_json summary;
    summary["schema"] = "locsub-summary-1";
    summary["groups"] = nlohmann::ordered_json::array();

    int index = 0;
    for (int count : config.extension_counts) {
      auto outcomes = run_pool(ctx, dipoles, Approach::localized, count, radial_meg);
      for (std::size_t i = 0; i < dipoles.size(); ++i)
        write_row(os, config, index++, ecc, dipoles[i], config.orientation, "localized", count,
                  outcomes[i]);
      auto g = group_summary(outcomes);
      g["eccentricity"] = ecc;
      g["approach"] = "localized";
      g["n_extensions"] = count;
      summary["groups"].push_back(g);
    }
    // rightmost comparator: classical subtraction
    auto outcomes = run_pool(ctx, dipoles, Approach::full_subtraction, 0, radial_meg);
    for (std::size_t i = 0; i < dipoles.size(); ++i)
      write_row(os, config, index++, ecc, dipoles[i], config.orientation, "full", -1, outcomes[i]);
    auto g = group_summary(outcomes);
    g["eccentricity"] = ecc;
    g["approach"] = "full";
    g["n_extensions"] = -1;
    summary["groups"].push_back(g);

    write_summary(config.out_path, summary);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}

namespace {

// Reference fixtures: regular unit tetrahedron and unit cube.
Mesh fixture_tet_mesh(double sigma_element) {
  const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  std::vector<Vec3> verts = {{0.0, -0.5, -s3 / 6.0},
                             {0.0, 0.5, -s3 / 6.0},
                             {0.0, 0.0, s3 / 3.0},
                             {-s6 / 3.0, 0.0, 0.0}};
  return Mesh::build(mesh::ElementKind::tet, std::move(verts), {0, 2, 1, 3}, {1},
                     {Mat3::identity(sigma_element)});
}

Mesh fixture_hex_mesh(double sigma_element) {
  std::vector<Vec3> verts = {{-1.0, -0.5, -0.5}, {0.0, -0.5, -0.5}, {-1.0, 0.5, -0.5},
                             {0.0, 0.5, -0.5},   {-1.0, -0.5, 0.5}, {0.0, -0.5, 0.5},
                             {-1.0, 0.5, 0.5},   {0.0, 0.5, 0.5}};
  return Mesh::build(mesh::ElementKind::hex, std::move(verts), {0, 1, 2, 3, 4, 5, 6, 7}, {1},
                     {Mat3::identity(sigma_element)});
}

struct FixtureCase {
  const Mesh& mesh;
  int surface_face;                // local face nearest the dipole
  std::vector<double> chi;         // 1 on the nearest face's vertices
};

double fixture_term_error(const FixtureCase& fc, ProblemKind problem, quad::SingularTerm term,
                          const Dipole& dipole, const HomogeneousConductivity& sigma_inf,
                          const Vec3& coil, int order, int oracle_order) {
  const Mesh& m = fc.mesh;
  Mat3 sigma_c = m.conductivity(0) - sigma_inf.tensor();
  Vec3 normal = m.face_normal(0, fc.surface_face);

  auto eeg_values = [&](int ord) -> std::vector<double> {
    switch (term) {
      case quad::SingularTerm::patch:
        return eeg::patch_term_numeric(m, 0, sigma_c, sigma_inf, dipole, ord);
      case quad::SingularTerm::transition:
        return eeg::transition_term_numeric(m, 0, fc.chi, sigma_inf, dipole, ord);
      case quad::SingularTerm::surface:
        return eeg::surface_term_numeric(m, 0, fc.surface_face, normal, sigma_inf, dipole, ord);
    }
    return {};
  };
  auto meg_values = [&](int ord) -> Vec3 {
    switch (term) {
      case quad::SingularTerm::patch:
        return meg::patch_flux_numeric(m, 0, sigma_c, sigma_inf, dipole, coil, ord);
      case quad::SingularTerm::transition:
        return meg::transition_flux_numeric(m, 0, fc.chi, sigma_inf, dipole, coil, ord);
      case quad::SingularTerm::surface:
        return meg::surface_flux_numeric(m, 0, fc.surface_face, normal, sigma_inf, dipole, coil,
                                         ord);
    }
    return {};
  };

  if (problem == ProblemKind::eeg) {
    auto v = eeg_values(order);
    auto ref = eeg_values(oracle_order);
    double diff = 0.0, rn = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      diff += (v[i] - ref[i]) * (v[i] - ref[i]);
      rn += ref[i] * ref[i];
    }
    return std::sqrt(diff / rn);
  }
  Vec3 v = meg_values(order);
  Vec3 ref = meg_values(oracle_order);
  return norm(v - ref) / norm(ref);
}

}  // namespace

int run_integration_study(const StudyConfig& config) {
  try {
    const double sigma_el = 2.0;
    HomogeneousConductivity sigma_inf(Mat3::identity(1.0));
    Mesh tet = fixture_tet_mesh(sigma_el);
    Mesh hex = fixture_hex_mesh(sigma_el);
    const Vec3 coil{20.0, 0.0, 0.0};
    const Vec3 moment = normalized(Vec3{0.3, 1.0, 0.5});

    // chi = 1 on the face nearest the dipole (the +x faces for x0 on +x)
    FixtureCase tet_case{tet, 3, {1.0, 1.0, 1.0, 0.0}};
    FixtureCase hex_case{hex, 1, {0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0}};

    std::ofstream os(config.out_path);
    if (!os) throw std::runtime_error("cannot write " + config.out_path);
    os << "# schema locsub-integration-1\n";
    os << "element,problem,term,ratio,order,rel_error\n";

    struct Combo {
      const char* element;
      ProblemKind problem;
      const FixtureCase* fc;
    };
    const Combo combos[] = {{"tet", ProblemKind::meg, &tet_case},
                            {"hex", ProblemKind::eeg, &hex_case},
                            {"hex", ProblemKind::meg, &hex_case}};
    const quad::SingularTerm terms[] = {quad::SingularTerm::surface,
                                        quad::SingularTerm::transition, quad::SingularTerm::patch};
    const char* term_names[] = {"surface", "transition", "patch"};

    for (const auto& combo : combos)
      for (int ti = 0; ti < 3; ++ti)
        for (double ratio : config.ratio_list) {
          Dipole dipole{ratio * Vec3{1.0, 0.1, 0.1}, moment};
          for (int order : config.order_list) {
            double err = fixture_term_error(*combo.fc, combo.problem, terms[ti], dipole,
                                            sigma_inf, coil, order, 50);
            os << combo.element << ','
               << (combo.problem == ProblemKind::eeg ? "eeg" : "meg") << ',' << term_names[ti]
               << ',' << fmt17(ratio) << ',' << order << ',' << fmt17(err) << '\n';
          }
        }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}

int run_timing_study(const StudyConfig& config) {
  try {
    if (config.problem != ProblemKind::eeg)
      throw std::invalid_argument("the timing study covers the EEG forward problem");
    ForwardContext ctx(config);
    auto dipoles = make_dipoles(config.sphere, config.timing_eccentricity, config.timing_dipoles,
                                config.orientation, config.seed);

    // transfer matrix precomputed and excluded from the timed section
    auto transfer =
        solver::compute_transfer(ctx.K, ctx.mesh, ctx.sensors.electrodes_m, ctx.cg);

    struct Timing {
      double assembly = 0.0, apply = 0.0;
      int ok = 0;
    };
    auto run = [&](Approach approach) {
      Timing t;
      for (const auto& d : dipoles) {
        Dipole dipole{d.position_m, d.moment};
        try {
          double t0 = now_seconds();
          solver::SparseVector rhs;
          if (approach == Approach::localized) {
            Patch patch = mesh::build_patch(ctx.mesh, dipole.position, config.n_extensions);
            rhs = eeg::assemble_rhs_localized(ctx.mesh, patch, dipole);
          } else {
            rhs = eeg::assemble_rhs_full_subtraction(ctx.mesh, dipole);
          }
          double t1 = now_seconds();
          auto vals = transfer.apply(rhs);
          double sum = 0.0;
          for (double v : vals) sum += v;
          volatile double sink = sum;  // keep the apply from being optimized out
          (void)sink;
          double t2 = now_seconds();
          t.assembly += t1 - t0;
          t.apply += t2 - t1;
          ++t.ok;
        } catch (const std::invalid_argument&) {
          // placement failures are recorded but not fatal
        }
      }
      return t;
    };

    Timing loc = run(Approach::localized);
    Timing full = run(Approach::full_subtraction);

    std::ofstream os(config.out_path);
    if (!os) throw std::runtime_error("cannot write " + config.out_path);
    os << "# schema locsub-timing-1\n";
    os << "approach,n_dipoles,n_ok,assembly_s,apply_s,total_s\n";
    os << "localized," << dipoles.size() << ',' << loc.ok << ',' << fmt17(loc.assembly) << ','
       << fmt17(loc.apply) << ',' << fmt17(loc.assembly + loc.apply) << '\n';
    os << "full," << dipoles.size() << ',' << full.ok << ',' << fmt17(full.assembly) << ','
       << fmt17(full.apply) << ',' << fmt17(full.assembly + full.apply) << '\n';

    nlohmann::ordered_json summary;
    summary["schema"] = "locsub-summary-1";
    summary["localized_total_s"] = loc.assembly + loc.apply;
    summary["full_total_s"] = full.assembly + full.apply;
    summary["time_ratio"] = (loc.assembly + loc.apply) / (full.assembly + full.apply);
    write_summary(config.out_path, summary);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  StudyConfig c;

  if (j.contains("mesh")) {
    const auto& m = j["mesh"];
    c.mesh_file = m.value("file", "");
    c.conductivities_file = m.value("conductivities", "");
    c.h_mm = m.value("h_mm", c.h_mm);
    std::string kind = m.value("kind", "hex");
    if (kind != "hex" && kind != "tet") throw std::invalid_argument("mesh.kind must be hex|tet");
    c.element_kind = kind == "hex" ? mesh::ElementKind::hex : mesh::ElementKind::tet;
    if (m.contains("sphere")) {
      const auto& s = m["sphere"];
      if (s.contains("radii_mm"))
        for (int i = 0; i < 4; ++i) c.sphere.layer_radii_mm[i] = s["radii_mm"][i].get<double>();
      if (s.contains("conductivities"))
        for (int i = 0; i < 4; ++i)
          c.sphere.layer_conductivities[i] = s["conductivities"][i].get<double>();
    }
  }
  std::string problem = j.value("problem", "eeg");
  if (problem != "eeg" && problem != "meg") throw std::invalid_argument("problem must be eeg|meg");
  c.problem = problem == "eeg" ? ProblemKind::eeg : ProblemKind::meg;
  std::string approach = j.value("approach", "localized");
  if (approach != "localized" && approach != "full-subtraction" && approach != "full")
    throw std::invalid_argument("approach must be localized|full-subtraction");
  c.approach = approach == "localized" ? Approach::localized : Approach::full_subtraction;
  c.n_extensions = j.value("n_extensions", 2);
  if (j.contains("eccentricities")) {
    for (const auto& e : j["eccentricities"]) {
      double ecc = e.get<double>();
      if (!(ecc > 0.0 && ecc < 1.0))
        throw std::invalid_argument("eccentricities must lie in (0,1)");
      c.eccentricities.push_back(ecc);
    }
  }
  c.dipoles_per_eccentricity = j.value("dipoles_per_eccentricity", c.dipoles_per_eccentricity);
  std::string orientation = j.value("orientation", "tangential");
  if (orientation != "radial" && orientation != "tangential")
    throw std::invalid_argument("orientation must be radial|tangential");
  c.orientation = orientation == "radial" ? Orientation::radial : Orientation::tangential;
  if (j.contains("sensors")) {
    const auto& s = j["sensors"];
    c.n_electrodes = s.value("electrodes", c.n_electrodes);
    c.n_coils = s.value("coils", c.n_coils);
    c.coil_radius_mm = s.value("coil_radius_mm", c.coil_radius_mm);
    c.electrodes_file = s.value("electrodes_file", "");
    c.coils_file = s.value("coils_file", "");
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    c.solver_tol = s.value("tol", c.solver_tol);
    c.use_ic0 = s.value("ic0", c.use_ic0);
    c.use_transfer = s.value("transfer", c.use_transfer);
  }
  if (j.contains("seed")) {
    c.seed = j["seed"].get<std::uint64_t>();
    c.seed_set = true;
  }
  c.threads = j.value("threads", 1);
  c.include_timings = j.value("include_timings", false);
  if (j.contains("extension_counts")) {
    c.extension_counts.clear();
    for (const auto& e : j["extension_counts"]) c.extension_counts.push_back(e.get<int>());
  }
  if (j.contains("orders")) {
    c.order_list.clear();
    for (const auto& e : j["orders"]) c.order_list.push_back(e.get<int>());
  }
  if (j.contains("ratios")) {
    c.ratio_list.clear();
    for (const auto& e : j["ratios"]) c.ratio_list.push_back(e.get<double>());
  }
  if (j.contains("timing")) {
    c.timing_dipoles = j["timing"].value("dipoles", c.timing_dipoles);
    c.timing_eccentricity = j["timing"].value("eccentricity", c.timing_eccentricity);
  }
  c.out_path = j.value("out", c.out_path);
  return c;
}

}  // namespace locsub::study
