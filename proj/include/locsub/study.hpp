#ifndef LOCSUB_STUDY_HPP
#define LOCSUB_STUDY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "locsub/mesh.hpp"
#include "locsub/sphere_analytic.hpp"

namespace locsub::study {

enum class ProblemKind { eeg, meg };
enum class Approach { localized, full_subtraction };
enum class Orientation { radial, tangential };

struct StudyConfig {
  // mesh source: builtin sphere or a file (.msh with conductivities, or .json dump)
  std::string mesh_file;            // empty => builtin
  std::string conductivities_file;  // tag -> S/m map for .msh files
  double h_mm = 4.0;
  mesh::ElementKind element_kind = mesh::ElementKind::hex;
  mesh::SphereModel sphere;

  ProblemKind problem = ProblemKind::eeg;
  Approach approach = Approach::localized;
  int n_extensions = 2;
  std::vector<double> eccentricities;  // defaults to the 10-step log grid
  int dipoles_per_eccentricity = 10;
  Orientation orientation = Orientation::tangential;

  int n_electrodes = 200;
  int n_coils = 256;
  double coil_radius_mm = 110.0;
  std::string electrodes_file;  // optional JSON layout
  std::string coils_file;

  double solver_tol = 1e-8;
  bool use_ic0 = true;  // study-level solver speedup; cg default stays Jacobi
  bool use_transfer = false;
  std::uint64_t seed = 0;
  bool seed_set = false;  // seed is mandatory for reproducibility
  int threads = 1;
  bool include_timings = false;
  std::string out_path = "study.csv";

  // extension study
  std::vector<int> extension_counts{0, 1, 2, 3};
  // integration study
  std::vector<int> order_list{2, 4, 6, 8, 10, 14, 20};
  std::vector<double> ratio_list{1.0 / 6.0, 0.25, 0.33, 0.5, 1.0, 2.0};
  // timing study
  int timing_dipoles = 100;
  double timing_eccentricity = 0.95;

  static std::vector<double> default_eccentricities();
};

StudyConfig load_config(const std::string& path);

/// EEG: ||zero_mean(num) - zero_mean(ana)|| / ||zero_mean(ana)||.
/// MEG: stacked vector 2-norm ratio, no mean shift.
double relative_error(const std::vector<double>& numeric, const std::vector<double>& analytic,
                      ProblemKind kind);
double relative_error_vec(const std::vector<Vec3>& numeric, const std::vector<Vec3>& analytic);

int run_sphere_study(const StudyConfig& config);
int run_extension_study(const StudyConfig& config);
int run_integration_study(const StudyConfig& config);
int run_timing_study(const StudyConfig& config);

/// Deterministic dipole set: Fibonacci-lattice directions with a seeded
/// angular jitter, at the given eccentricity (radius = ecc * brain radius).
struct DipoleSample {
  Vec3 position_m;
  Vec3 moment;  // unit magnitude
};
std::vector<DipoleSample> make_dipoles(const mesh::SphereModel& sphere, double eccentricity,
                                       int count, Orientation orientation, std::uint64_t seed);

}  // namespace locsub::study

#endif
