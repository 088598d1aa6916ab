#include "dklab/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <memory>

#include "dklab/errors.hpp"

namespace dklab {

namespace {

QuadratureRule fixed_rule(const gsl_integration_fixed_type* type, int n, double a, double b) {
  if (n < 1) throw ParameterError("quadrature needs at least one node");
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(type, static_cast<std::size_t>(n), a, b, 0.0, 0.0), &gsl_integration_fixed_free);
  if (!ws) throw ParameterError("failed to build quadrature rule");
  const double* x = gsl_integration_fixed_nodes(ws.get());
  const double* w = gsl_integration_fixed_weights(ws.get());
  return {std::vector<double>(x, x + n), std::vector<double>(w, w + n)};
}

}  // namespace

QuadratureRule gauss_hermite(int nodes) { return fixed_rule(gsl_integration_fixed_hermite, nodes, 0.0, 1.0); }

QuadratureRule gauss_legendre(int nodes) { return fixed_rule(gsl_integration_fixed_legendre, nodes, -1.0, 1.0); }

}  // namespace dklab
