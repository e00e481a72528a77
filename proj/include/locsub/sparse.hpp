#ifndef LOCSUB_SPARSE_HPP
#define LOCSUB_SPARSE_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace locsub::solver {

/// Compressed sparse row matrix (square, symmetric by construction here).
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(int n, std::vector<std::int64_t> offsets, std::vector<int> cols,
            std::vector<double> vals)
      : n_(n), offsets_(std::move(offsets)), cols_(std::move(cols)), vals_(std::move(vals)) {}

  int rows() const { return n_; }
  std::int64_t nonzeros() const { return static_cast<std::int64_t>(vals_.size()); }
  const std::vector<std::int64_t>& offsets() const { return offsets_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> diagonal() const;
  /// Max |K x - b| relative to |b| in the 2-norm.
  double residual_norm(const std::vector<double>& x, const std::vector<double>& b) const;

 private:
  int n_ = 0;
  std::vector<std::int64_t> offsets_;
  std::vector<int> cols_;
  std::vector<double> vals_;
};

/// Sparse vector over FEM degrees of freedom.
struct SparseVector {
  std::vector<std::pair<int, double>> entries;  // sorted by index, unique

  void add(int index, double value);
  /// Sort + combine duplicate indices; drop exact zeros created by merging.
  void compress();
  double dot_dense(const std::vector<double>& x) const;
  double sum() const;
  double norm1() const;
  std::vector<double> to_dense(int n) const;
};

}  // namespace locsub::solver

#endif
