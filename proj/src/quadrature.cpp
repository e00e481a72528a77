#include "locsub/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace locsub::quad {

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on P_n over [-1,1], then map to [0,1].
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = (1.0 - x) / 2.0;  // descending cos roots -> ascending nodes
    nodes[n - 1 - i] = (1.0 + x) / 2.0;
    weights[i] = w / 2.0;
    weights[n - 1 - i] = w / 2.0;
  }
}

namespace {

constexpr int kMaxOrder = 60;

void check_order(int order) {
  if (order < 0) throw std::invalid_argument("quadrature order must be >= 0");
  if (order > kMaxOrder) throw std::invalid_argument("quadrature order above 60 rejected");
}

std::shared_ptr<QuadratureRule> make_triangle(int order) {
  auto rule = std::make_shared<QuadratureRule>();
  rule->domain = Domain::triangle;
  rule->order = order;
  if (order <= 1) {
    rule->points = {{1.0 / 3.0, 1.0 / 3.0, 0.0}};
    rule->weights = {0.5};
    return rule;
  }
  if (order == 2) {
    rule->points = {{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.5, 0.5, 0.0}};
    rule->weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
  }
  int n1 = (order + 3) / 2;  // ceil((order+2)/2)
  int n2 = (order + 2) / 2;
  std::vector<double> x1, w1, x2, w2;
  gauss_legendre_01(n1, x1, w1);
  gauss_legendre_01(n2, x2, w2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double u = x1[i], v = x2[j];
      rule->points.push_back({u, v * (1.0 - u), 0.0});
      rule->weights.push_back(w1[i] * w2[j] * (1.0 - u));
    }
  return rule;
}

std::shared_ptr<QuadratureRule> make_tet(int order) {
  auto rule = std::make_shared<QuadratureRule>();
  rule->domain = Domain::tet;
  rule->order = order;
  if (order <= 1) {
    rule->points = {{0.25, 0.25, 0.25}};
    rule->weights = {1.0 / 6.0};
    return rule;
  }
  if (order == 2) {
    const double a = 0.5854101966249685;  // (5 + 3*sqrt(5)) / 20
    const double b = 0.1381966011250105;  // (5 - sqrt(5)) / 20
    rule->points = {{a, b, b}, {b, a, b}, {b, b, a}, {b, b, b}};
    rule->weights.assign(4, 1.0 / 24.0);
    return rule;
  }
  int n1 = (order + 4) / 2;  // ceil((order+3)/2)
  int n2 = (order + 3) / 2;
  int n3 = (order + 2) / 2;
  std::vector<double> x1, w1, x2, w2, x3, w3;
  gauss_legendre_01(n1, x1, w1);
  gauss_legendre_01(n2, x2, w2);
  gauss_legendre_01(n3, x3, w3);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      for (int k = 0; k < n3; ++k) {
        double u = x1[i], v = x2[j], w = x3[k];
        rule->points.push_back({u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v)});
        rule->weights.push_back(w1[i] * w2[j] * w3[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
      }
  return rule;
}

std::shared_ptr<QuadratureRule> make_cube(int dim, int order) {
  auto rule = std::make_shared<QuadratureRule>();
  rule->domain = dim == 2 ? Domain::quad : Domain::hex;
  rule->order = order;
  int n = (order + 2) / 2;  // 2n-1 >= order
  std::vector<double> x, w;
  gauss_legendre_01(n, x, w);
  if (dim == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        rule->points.push_back({x[i], x[j], 0.0});
        rule->weights.push_back(w[i] * w[j]);
      }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          rule->points.push_back({x[i], x[j], x[k]});
          rule->weights.push_back(w[i] * w[j] * w[k]);
        }
  }
  return rule;
}

std::mutex cache_mutex;
std::map<std::pair<Domain, int>, std::shared_ptr<const QuadratureRule>> cache;

std::shared_ptr<const QuadratureRule> cached(Domain d, int order) {
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = std::make_pair(d, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const QuadratureRule> rule;
  switch (d) {
    case Domain::triangle: rule = make_triangle(order); break;
    case Domain::tet: rule = make_tet(order); break;
    case Domain::quad: rule = make_cube(2, order); break;
    case Domain::hex: rule = make_cube(3, order); break;
  }
  cache.emplace(key, rule);
  return rule;
}

}  // namespace

std::shared_ptr<const QuadratureRule> simplex_rule(int dim, int order) {
  check_order(order);
  if (dim != 2 && dim != 3) throw std::invalid_argument("simplex_rule: dim must be 2 or 3");
  return cached(dim == 2 ? Domain::triangle : Domain::tet, order);
}

std::shared_ptr<const QuadratureRule> cube_rule(int dim, int order) {
  check_order(order);
  if (dim != 2 && dim != 3) throw std::invalid_argument("cube_rule: dim must be 2 or 3");
  return cached(dim == 2 ? Domain::quad : Domain::hex, order);
}

std::shared_ptr<const QuadratureRule> rule_for(Domain d, int order) {
  check_order(order);
  return cached(d, order);
}

int select_tet_patch_order(double ratio) {
  if (!(ratio >= 1.0 / 6.0))
    throw std::domain_error("tet patch order rule is only valid for d/a >= 1/6");
  if (ratio >= 0.5) return 8;
  if (ratio >= 0.4) return 9;
  if (ratio >= 0.33) return 11;
  if (ratio >= 0.25) return 13;
  return 20;  // 1/6 <= ratio < 0.25 bucket, listed as >= 0.17
}

int fixed_orders(ElementKind kind, Problem problem, SingularTerm term) {
  if (kind == ElementKind::hex) {
    switch (term) {
      case SingularTerm::surface: return 6;
      case SingularTerm::transition: return 6;
      case SingularTerm::patch: return 8;
    }
  }
  if (problem == Problem::eeg)
    throw std::invalid_argument(
        "tet EEG terms have no fixed numeric order; use the analytic transition path");
  switch (term) {
    case SingularTerm::surface: return 6;
    case SingularTerm::transition: return 5;
    case SingularTerm::patch:
      throw std::invalid_argument(
          "tet MEG patch order depends on d/a; use select_tet_patch_order");
  }
  throw std::logic_error("unreachable");
}

}  // namespace locsub::quad
