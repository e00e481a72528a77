#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "locsub/mesh.hpp"
#include "locsub/study.hpp"

namespace {

using locsub::study::StudyConfig;

StudyConfig make_config(const std::string& config_path, const std::string& out,
                        std::uint64_t seed, bool seed_given, int threads) {
  StudyConfig c;
  if (!config_path.empty()) c = locsub::study::load_config(config_path);
  if (!out.empty()) c.out_path = out;
  if (seed_given) {
    c.seed = seed;
    c.seed_set = true;
  }
  if (threads > 0) c.threads = threads;
  if (!c.seed_set) throw std::invalid_argument("a seed is required (--seed or config \"seed\")");
  return c;
}

int mesh_gen(const std::string& out, double h_mm, const std::string& kind) {
  locsub::mesh::SphereModel model;
  locsub::mesh::Mesh m = locsub::mesh::generate_voxel_sphere(model, h_mm);
  if (kind == "tet") m = locsub::mesh::split_hex_to_tet(m);
  locsub::mesh::save_mesh_json(m, out);
  std::printf("wrote %s: %zu vertices, %zu %s elements\n", out.c_str(), m.num_vertices(),
              m.num_elements(), kind.c_str());
  return 0;
}

int mesh_info(const std::string& path, const std::string& conductivities) {
  locsub::mesh::Mesh m = [&] {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".msh") {
      if (conductivities.empty())
        throw std::invalid_argument("a .msh mesh needs --conductivities <tag-map.json>");
      std::ifstream in(conductivities);
      if (!in) throw std::runtime_error("cannot open " + conductivities);
      nlohmann::json j = nlohmann::json::parse(in);
      std::map<int, locsub::Mat3> tags;
      for (auto& [key, val] : j.items()) {
        if (val.is_number()) {
          tags[std::stoi(key)] = locsub::Mat3::identity(val.get<double>());
        } else {
          locsub::Mat3 t;
          for (int i = 0; i < 9; ++i) t.m[i] = val[i].get<double>();
          tags[std::stoi(key)] = t;
        }
      }
      return locsub::mesh::load_gmsh_ascii(path, tags);
    }
    return locsub::mesh::load_mesh_json(path);
  }();
  std::printf("vertices: %zu\n", m.num_vertices());
  std::printf("elements: %zu (%s)\n", m.num_elements(),
              m.kind() == locsub::mesh::ElementKind::tet ? "tet" : "hex");
  std::printf("boundary faces: %zu\n", m.boundary_faces().size());
  std::printf("total volume: %.6f cm^3\n", m.total_volume() * 1e6);
  for (const auto& [label, vol] : m.volume_by_label())
    std::printf("  label %d: %.6f cm^3\n", label, vol * 1e6);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized-subtraction FEM forward simulation studies"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON study configuration");
    sub->add_option("--out", out_path, "output CSV path");
    sub->add_option("--seed", seed, "RNG seed (required here or in the config)")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--threads", threads, "worker threads");
  };

  auto* sphere = app.add_subcommand("sphere-study", "eccentricity accuracy sweep");
  add_common(sphere);
  auto* extension = app.add_subcommand("extension-study", "vertex-extension comparison");
  add_common(extension);
  auto* integration = app.add_subcommand("integration-study", "quadrature-order error study");
  add_common(integration);
  auto* timing = app.add_subcommand("timing-study", "localized vs full subtraction timing");
  add_common(timing);

  auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
  mesh_cmd->require_subcommand(1);
  std::string mesh_out = "mesh.json", mesh_kind = "hex", mesh_path, cond_path;
  double gen_h = 4.0;
  auto* gen = mesh_cmd->add_subcommand("gen", "generate the builtin voxel sphere");
  gen->add_option("--h-mm", gen_h, "voxel edge length in mm");
  gen->add_option("--kind", mesh_kind, "hex or tet")->check(CLI::IsMember({"hex", "tet"}));
  gen->add_option("--out", mesh_out, "output JSON mesh path");
  auto* info = mesh_cmd->add_subcommand("info", "print mesh statistics");
  info->add_option("path", mesh_path, "mesh file (JSON dump)")->required();
  info->add_option("--conductivities", cond_path, "tag map for .msh files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return mesh_gen(mesh_out, gen_h, mesh_kind);
    if (info->parsed()) return mesh_info(mesh_path, cond_path);
    StudyConfig c = make_config(config_path, out_path, seed, seed_given, threads);
    if (sphere->parsed()) return locsub::study::run_sphere_study(c);
    if (extension->parsed()) return locsub::study::run_extension_study(c);
    if (integration->parsed()) return locsub::study::run_integration_study(c);
    if (timing->parsed()) return locsub::study::run_timing_study(c);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
