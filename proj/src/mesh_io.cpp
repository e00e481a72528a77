#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "locsub/mesh.hpp"

namespace locsub::mesh {

namespace {

Mat3 conductivity_from_json(const nlohmann::json& j) {
  if (j.is_number()) return Mat3::identity(j.get<double>());
  if (j.is_array() && j.size() == 9) {
    Mat3 t;
    for (int i = 0; i < 9; ++i) t.m[i] = j[i].get<double>();
    return t;
  }
  throw std::invalid_argument("conductivity entry must be a scalar or a 3x3 row-major array");
}

}  // namespace

Mesh load_gmsh_ascii(const std::string& path, const std::map<int, Mat3>& tag_conductivity) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);

  std::string line;
  std::vector<Vec3> vertices;
  std::vector<int> id_map;  // gmsh node id -> vertex index
  std::vector<int> connectivity, labels;
  std::vector<Mat3> conductivity;
  bool format_seen = false;

  while (std::getline(in, line)) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      std::getline(in, line);
      std::istringstream fmt(line);
      std::string version;
      fmt >> version;
      if (version.rfind("2.2", 0) != 0)
        throw std::runtime_error("unsupported Gmsh format version: " + version);
      format_seen = true;
    } else if (line.rfind("$Nodes", 0) == 0) {
      std::getline(in, line);
      std::size_t count = std::stoul(line);
      vertices.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::getline(in, line);
        std::istringstream ls(line);
        long id;
        double x, y, z;
        if (!(ls >> id >> x >> y >> z)) throw std::runtime_error("malformed $Nodes line");
        if (id < 1) throw std::runtime_error("node ids must be positive");
        if (id_map.size() <= static_cast<std::size_t>(id)) id_map.resize(id + 1, -1);
        id_map[id] = static_cast<int>(vertices.size());
        vertices.push_back(1e-3 * Vec3{x, y, z});
      }
    } else if (line.rfind("$Elements", 0) == 0) {
      std::getline(in, line);
      std::size_t count = std::stoul(line);
      for (std::size_t i = 0; i < count; ++i) {
        std::getline(in, line);
        std::istringstream ls(line);
        long id;
        int type, ntags;
        if (!(ls >> id >> type >> ntags)) throw std::runtime_error("malformed $Elements line");
        std::vector<int> tags(ntags);
        for (int t = 0; t < ntags; ++t) ls >> tags[t];
        if (type == 1 || type == 2 || type == 15) continue;  // boundary entities
        if (type != 4) throw std::runtime_error("unsupported element type " + std::to_string(type));
        std::array<long, 4> nodes{};
        for (long& nref : nodes)
          if (!(ls >> nref)) throw std::runtime_error("truncated tetrahedron line");
        if (ntags < 1) throw std::runtime_error("tetrahedron without a physical-region tag");
        int tag = tags[0];
        auto it = tag_conductivity.find(tag);
        if (it == tag_conductivity.end())
          throw std::runtime_error("no conductivity for region tag " + std::to_string(tag));
        for (long nref : nodes) {
          if (nref < 1 || static_cast<std::size_t>(nref) >= id_map.size() || id_map[nref] < 0)
            throw std::runtime_error("element references unknown node " + std::to_string(nref));
          connectivity.push_back(id_map[nref]);
        }
        labels.push_back(tag);
        conductivity.push_back(it->second);
      }
    }
  }
  if (!format_seen) throw std::runtime_error("not a Gmsh ASCII v2.2 file: " + path);
  if (labels.empty()) throw std::runtime_error("mesh file contains no tetrahedra");
  return Mesh::build(ElementKind::tet, std::move(vertices), std::move(connectivity),
                     std::move(labels), std::move(conductivity));
}

void save_mesh_json(const Mesh& mesh, const std::string& path) {
  nlohmann::json verts = nlohmann::json::array();
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
    const Vec3& p = mesh.vertex(v);
    verts.push_back({p.x * 1e3, p.y * 1e3, p.z * 1e3});
  }
  nlohmann::json elems = nlohmann::json::array();
  nlohmann::json labels = nlohmann::json::array();
  nlohmann::json sigma = nlohmann::json::array();
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
    auto ev = mesh.element(e);
    elems.push_back(std::vector<int>(ev.begin(), ev.end()));
    labels.push_back(mesh.label(e));
    const Mat3& t = mesh.conductivity(e);
    bool iso = t(0, 1) == 0 && t(0, 2) == 0 && t(1, 2) == 0 && t(0, 0) == t(1, 1) &&
               t(0, 0) == t(2, 2);
    if (iso)
      sigma.push_back(t(0, 0));
    else
      sigma.push_back(std::vector<double>(t.m.begin(), t.m.end()));
  }
  nlohmann::ordered_json j;
  j["unit"] = "mm";
  j["element_kind"] = mesh.kind() == ElementKind::tet ? "tet" : "hex";
  j["vertices"] = std::move(verts);
  j["elements"] = std::move(elems);
  j["labels"] = std::move(labels);
  j["conductivities"] = std::move(sigma);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out << j.dump() << "\n";
}

Mesh load_mesh_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);

  ElementKind kind = j.at("element_kind").get<std::string>() == "hex" ? ElementKind::hex
                                                                      : ElementKind::tet;
  std::vector<Vec3> vertices;
  for (const auto& v : j.at("vertices"))
    vertices.push_back(1e-3 * Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
  std::vector<int> connectivity, labels;
  std::vector<Mat3> conductivity;
  for (const auto& e : j.at("elements"))
    for (const auto& idx : e) connectivity.push_back(idx.get<int>());
  for (const auto& l : j.at("labels")) labels.push_back(l.get<int>());
  for (const auto& s : j.at("conductivities")) conductivity.push_back(conductivity_from_json(s));
  return Mesh::build(kind, std::move(vertices), std::move(connectivity), std::move(labels),
                     std::move(conductivity));
}

}  // namespace locsub::mesh
