#include "locsub/transfer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace locsub::solver {

std::vector<double> TransferMatrix::apply(const SparseVector& rhs) const {
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (!rows[r].empty()) out[r] = rhs.dot_dense(rows[r]);
  return out;
}

std::vector<double> TransferMatrix::apply_dense(const std::vector<double>& rhs) const {
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].empty()) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) s += rows[r][i] * rhs[i];
    out[r] = s;
  }
  return out;
}

std::vector<int> map_electrodes_to_vertices(const mesh::Mesh& mesh,
                                            const std::vector<Vec3>& electrodes_m) {
  const auto& surface = mesh.boundary_vertices();
  if (surface.empty()) throw std::runtime_error("mesh has no boundary vertices");
  std::vector<int> out;
  out.reserve(electrodes_m.size());
  for (const Vec3& e : electrodes_m) {
    int best = surface[0];
    double best_d = std::numeric_limits<double>::max();
    for (int v : surface) {
      double d = norm2(mesh.vertex(v) - e);
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
    out.push_back(best);
  }
  return out;
}

TransferMatrix compute_transfer(const CsrMatrix& K, const mesh::Mesh& mesh,
                                const std::vector<Vec3>& electrodes_m, const CgOptions& opts) {
  if (electrodes_m.empty()) throw std::invalid_argument("no electrodes given");
  TransferMatrix tm;
  tm.sensor_vertex_ids = map_electrodes_to_vertices(mesh, electrodes_m);
  tm.snap_distance_m.resize(electrodes_m.size());
  for (std::size_t i = 0; i < electrodes_m.size(); ++i)
    tm.snap_distance_m[i] = norm(mesh.vertex(tm.sensor_vertex_ids[i]) - electrodes_m[i]);

  tm.rows.resize(electrodes_m.size());
  const int ref = tm.sensor_vertex_ids[0];
  std::vector<double> b(K.rows(), 0.0);
  for (std::size_t r = 1; r < electrodes_m.size(); ++r) {
    int s = tm.sensor_vertex_ids[r];
    if (s == ref) {
      tm.rows[r].assign(K.rows(), 0.0);
      continue;
    }
    b.assign(K.rows(), 0.0);
    b[s] = 1.0;
    b[ref] = -1.0;
    tm.rows[r] = cg_solve(K, b, opts).x;
  }
  return tm;
}

}  // namespace locsub::solver
