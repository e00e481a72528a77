#ifndef LOCSUB_QUADRATURE_HPP
#define LOCSUB_QUADRATURE_HPP

#include <memory>
#include <vector>

#include "locsub/vec.hpp"

namespace locsub::quad {

enum class Domain { triangle, tet, quad, hex };

/// Reference-element quadrature rule. Points live on the unit reference
/// domain: triangle {x,y>=0, x+y<=1}, tet {x,y,z>=0, x+y+z<=1},
/// quad [0,1]^2, hex [0,1]^3. Weights sum to the reference measure.
struct QuadratureRule {
  Domain domain;
  int order;  // declared polynomial exactness
  std::vector<Vec3> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre nodes/weights on [0,1], exact for degree 2n-1.
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Simplex rule (dim 2: triangle, dim 3: tet) of at least the requested
/// polynomial exactness. Collapsed tensor-product construction; deterministic.
/// Orders above 60 are rejected.
std::shared_ptr<const QuadratureRule> simplex_rule(int dim, int order);

/// Tensor Gauss-Legendre rule on [0,1]^dim (dim 2: quad, dim 3: hex).
std::shared_ptr<const QuadratureRule> cube_rule(int dim, int order);

std::shared_ptr<const QuadratureRule> rule_for(Domain d, int order);

enum class ElementKind { tet, hex };
enum class Problem { eeg, meg };
enum class SingularTerm { surface, transition, patch };

/// Integration order for the tetrahedral MEG patch flux as a function of the
/// distance-to-edge-length ratio d/a. Valid for ratio >= 1/6.
int select_tet_patch_order(double ratio);

/// Fixed integration orders: hex EEG/MEG surface 6 / transition 6 / patch 8;
/// tet MEG surface 6 / transition 5. Tet EEG terms and the tet MEG patch term
/// have no fixed order and raise.
int fixed_orders(ElementKind kind, Problem problem, SingularTerm term);

}  // namespace locsub::quad

#endif
