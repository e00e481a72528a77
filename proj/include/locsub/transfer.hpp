#ifndef LOCSUB_TRANSFER_HPP
#define LOCSUB_TRANSFER_HPP

#include <vector>

#include "locsub/cg.hpp"
#include "locsub/mesh.hpp"
#include "locsub/sparse.hpp"

namespace locsub::solver {

/// EEG transfer matrix: row r maps any zero-sum right-hand side to the
/// potential difference between electrode r and the reference (the first
/// electrode). The reference row is identically zero.
struct TransferMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<int> sensor_vertex_ids;
  std::vector<double> snap_distance_m;  // electrode to chosen vertex

  std::vector<double> apply(const SparseVector& rhs) const;
  std::vector<double> apply_dense(const std::vector<double>& rhs) const;
};

/// Nearest boundary vertex for each electrode position.
std::vector<int> map_electrodes_to_vertices(const mesh::Mesh& mesh,
                                            const std::vector<Vec3>& electrodes_m);

TransferMatrix compute_transfer(const CsrMatrix& K, const mesh::Mesh& mesh,
                                const std::vector<Vec3>& electrodes_m, const CgOptions& opts = {});

}  // namespace locsub::solver

#endif
