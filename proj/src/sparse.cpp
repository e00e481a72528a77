#include "locsub/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace locsub::solver {

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::int64_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (std::int64_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
      if (cols_[k] == i) d[i] = vals_[k];
  return d;
}

double CsrMatrix::residual_norm(const std::vector<double>& x, const std::vector<double>& b) const {
  double rr = 0.0, bb = 0.0;
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::int64_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
    double r = s - b[i];
    rr += r * r;
    bb += b[i] * b[i];
  }
  return bb > 0.0 ? std::sqrt(rr / bb) : std::sqrt(rr);
}

void SparseVector::add(int index, double value) { entries.emplace_back(index, value); }

void SparseVector::compress() {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < entries.size();) {
    int idx = entries[i].first;
    double s = 0.0;
    while (i < entries.size() && entries[i].first == idx) s += entries[i++].second;
    if (s != 0.0) entries[out++] = {idx, s};
  }
  entries.resize(out);
}

double SparseVector::dot_dense(const std::vector<double>& x) const {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += v * x[i];
  return s;
}

double SparseVector::sum() const {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += v;
  return s;
}

double SparseVector::norm1() const {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += std::abs(v);
  return s;
}

std::vector<double> SparseVector::to_dense(int n) const {
  std::vector<double> x(n, 0.0);
  for (const auto& [i, v] : entries) x[i] += v;
  return x;
}

}  // namespace locsub::solver
