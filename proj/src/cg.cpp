#include "locsub/cg.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace locsub::solver {

void zero_mean(std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("zero_mean of empty vector");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  for (double& v : values) v -= mean;
}

std::vector<double> zero_meaned(std::vector<double> values) {
  zero_mean(values);
  return values;
}

IncompleteCholesky::IncompleteCholesky(const CsrMatrix& K) : n_(K.rows()) {
  // strictly lower triangular pattern of K
  const auto& ko = K.offsets();
  const auto& kc = K.cols();
  const auto& kv = K.values();
  offsets_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i)
    for (std::int64_t k = ko[i]; k < ko[i + 1]; ++k)
      if (kc[k] < i) ++offsets_[i + 1];
  for (int i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  cols_.resize(offsets_[n_]);
  vals_.assign(offsets_[n_], 0.0);
  diag_.assign(n_, 0.0);

  std::vector<double> orig_diag(n_, 0.0);
  {
    std::vector<std::int64_t> cur(offsets_.begin(), offsets_.end() - 1);
    for (int i = 0; i < n_; ++i)
      for (std::int64_t k = ko[i]; k < ko[i + 1]; ++k) {
        if (kc[k] < i) {
          cols_[cur[i]] = kc[k];
          vals_[cur[i]++] = kv[k];
        } else if (kc[k] == i) {
          orig_diag[i] = kv[k];
        }
      }
  }

  // IC(0) with a diagonal shift retried until all pivots are positive.
  double shift = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    bool ok = true;
    {
      std::vector<std::int64_t> cur(offsets_.begin(), offsets_.end() - 1);
      for (int i = 0; i < n_; ++i)
        for (std::int64_t k = ko[i]; k < ko[i + 1]; ++k)
          if (kc[k] < i) vals_[cur[i]++] = kv[k];
    }
    for (int i = 0; i < n_ && ok; ++i) {
      double rowsum = 0.0;
      for (std::int64_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
        int j = cols_[k];
        // subtract sum_{m<j} L_im L_jm by merging the two sparse rows
        double s = vals_[k];
        std::int64_t pi = offsets_[i], pj = offsets_[j];
        while (pi < k && pj < offsets_[j + 1]) {
          if (cols_[pi] == cols_[pj]) {
            s -= vals_[pi] * vals_[pj];
            ++pi;
            ++pj;
          } else if (cols_[pi] < cols_[pj]) {
            ++pi;
          } else {
            ++pj;
          }
        }
        vals_[k] = s / diag_[j];
        rowsum += vals_[k] * vals_[k];
      }
      double d = orig_diag[i] * (1.0 + shift) - rowsum;
      if (!(d > 0.0)) {
        ok = false;
        break;
      }
      diag_[i] = std::sqrt(d);
    }
    if (ok) return;
    shift = shift == 0.0 ? 1e-3 : shift * 4.0;
  }
  throw std::runtime_error("incomplete Cholesky breakdown");
}

void IncompleteCholesky::apply(const std::vector<double>& r, std::vector<double>& z) const {
  z.assign(n_, 0.0);
  // forward solve L y = r
  for (int i = 0; i < n_; ++i) {
    double s = r[i];
    for (std::int64_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s -= vals_[k] * z[cols_[k]];
    z[i] = s / diag_[i];
  }
  // backward solve L^T z = y
  for (int i = n_ - 1; i >= 0; --i) {
    z[i] /= diag_[i];
    double zi = z[i];
    for (std::int64_t k = offsets_[i]; k < offsets_[i + 1]; ++k) z[cols_[k]] -= vals_[k] * zi;
  }
}

CgResult cg_solve(const CsrMatrix& K, const std::vector<double>& b, const CgOptions& opts) {
  const int n = K.rows();
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("cg_solve: size mismatch");

  double bnorm = 0.0, bsum = 0.0, babs = 0.0;
  for (double v : b) {
    bnorm += v * v;
    bsum += v;
    babs += std::abs(v);
  }
  bnorm = std::sqrt(bnorm);
  if (babs > 0.0 && std::abs(bsum) > 1e-8 * babs)
    throw std::invalid_argument("cg_solve: right-hand side is not zero-sum");

  CgResult res;
  res.x.assign(n, 0.0);
  if (bnorm == 0.0) return res;

  std::vector<double> x(n, 0.0);
  if (opts.start) {
    if (static_cast<int>(opts.start->size()) != n)
      throw std::invalid_argument("cg_solve: start vector size mismatch");
    x = *opts.start;
    zero_mean(x);
  }

  std::vector<double> diag;
  std::unique_ptr<IncompleteCholesky> ic;
  if (opts.preconditioner == Preconditioner::jacobi) {
    diag = K.diagonal();
    for (double& d : diag)
      if (d <= 0.0) throw std::runtime_error("cg_solve: non-positive diagonal entry");
  } else {
    ic = std::make_unique<IncompleteCholesky>(K);
  }

  std::vector<double> r(n), z(n), p(n), Kp(n);
  K.multiply(x, Kp);
  for (int i = 0; i < n; ++i) r[i] = b[i] - Kp[i];

  auto precond = [&](const std::vector<double>& rin, std::vector<double>& zout) {
    if (ic) {
      ic->apply(rin, zout);
    } else {
      zout.resize(n);
      for (int i = 0; i < n; ++i) zout[i] = rin[i] / diag[i];
    }
    zero_mean(zout);  // project onto the zero-sum complement of the kernel
  };

  precond(r, z);
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];

  for (int it = 1; it <= opts.max_iter; ++it) {
    K.multiply(p, Kp);
    double pKp = 0.0;
    for (int i = 0; i < n; ++i) pKp += p[i] * Kp[i];
    if (pKp <= 0.0) throw std::runtime_error("cg_solve: matrix is not positive semidefinite");
    double alpha = rz / pKp;
    double rnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Kp[i];
      rnorm += r[i] * r[i];
    }
    res.iterations = it;
    if (std::sqrt(rnorm) <= opts.tol * bnorm) {
      zero_mean(x);
      res.x = std::move(x);
      res.residual = K.residual_norm(res.x, b);
      return res;
    }
    precond(r, z);
    double rz_next = 0.0;
    for (int i = 0; i < n; ++i) rz_next += r[i] * z[i];
    double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw std::runtime_error("cg_solve: max_iter exceeded");
}

}  // namespace locsub::solver
