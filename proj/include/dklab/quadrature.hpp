#pragma once

#include <vector>

namespace dklab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for weight exp(-y^2) on the real line.
QuadratureRule gauss_hermite(int nodes);

/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int nodes);

}  // namespace dklab
