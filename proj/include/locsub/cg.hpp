#ifndef LOCSUB_CG_HPP
#define LOCSUB_CG_HPP

#include <vector>

#include "locsub/sparse.hpp"

namespace locsub::solver {

enum class Preconditioner { jacobi, ic0 };

struct CgOptions {
  double tol = 1e-8;
  int max_iter = 100000;
  Preconditioner preconditioner = Preconditioner::jacobi;
  const std::vector<double>* start = nullptr;  // optional start vector
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;  // |Kx - b| / |b|
};

/// Subtract the mean in place; raises on empty input.
void zero_mean(std::vector<double>& values);
std::vector<double> zero_meaned(std::vector<double> values);

/// Preconditioned conjugate gradients for the singular Neumann system:
/// K symmetric PSD with kernel spanned by the constant vector, <b, 1> ~ 0.
/// Iterates are kept mean-free; the returned solution has zero mean.
/// Raises when b is not zero-sum (1e-8 relative) or max_iter is exceeded.
CgResult cg_solve(const CsrMatrix& K, const std::vector<double>& b, const CgOptions& opts = {});

/// Zero-fill-in incomplete Cholesky factor for use as a CG preconditioner.
/// Falls back to a diagonal shift when a pivot breaks down.
class IncompleteCholesky {
 public:
  explicit IncompleteCholesky(const CsrMatrix& K);
  void apply(const std::vector<double>& r, std::vector<double>& z) const;

 private:
  int n_ = 0;
  std::vector<std::int64_t> offsets_;  // strictly-lower pattern, by row
  std::vector<int> cols_;
  std::vector<double> vals_;
  std::vector<double> diag_;
};

}  // namespace locsub::solver

#endif
