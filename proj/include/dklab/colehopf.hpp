#pragma once

#include <span>
#include <vector>

#include "dklab/geometry.hpp"
#include "dklab/heat.hpp"
#include "dklab/testfn.hpp"

namespace dklab {

/// exp(-phi/alpha) - 1 with exact gradient and Laplacian. Vanishes wherever
/// phi does, so it keeps phi's support.
TestFunction exp_shift(const TestFunction& phi, double alpha);

struct FiniteDifferenceSteps {
  double time = 1e-3;
  double space_rel = 1e-4;  // h_x = space_rel * (1 + |x|)
};

/// Cole-Hopf solution V_t phi = -alpha ln(P_t exp(-phi/alpha)) of
/// dv/dt = (alpha/2) Lap v - (1/2) |grad v|^2, v(0) = phi.
///
/// Evaluated in the shifted form -alpha log1p(P_t (exp(-phi/alpha) - 1)); the
/// shifted integrand inherits phi's support, which keeps quadrature local.
class ColeHopf {
 public:
  explicit ColeHopf(HeatEvaluator heat);
  ColeHopf(double alpha, int dimension, int quad_nodes = HeatEvaluator::kDefaultNodes);

  const HeatEvaluator& heat() const noexcept { return heat_; }
  double alpha() const noexcept { return heat_.alpha(); }
  int dimension() const noexcept { return heat_.dimension(); }

  double value(const TestFunction& phi, double t, std::span<const double> x) const;

  /// -alpha ln(P_t exp(-phi/alpha)) with plain Gauss-Hermite quadrature of
  /// exp(-phi/alpha); an independent cross-check, accurate for smooth phi
  /// whose features are wide compared with sqrt(alpha t).
  double value_direct(const TestFunction& phi, double t, std::span<const double> x) const;

  struct Derivatives {
    double value = 0.0;
    Point gradient;
    double laplacian = 0.0;
  };

  /// Value, gradient and Laplacian from one quadrature pass, via
  /// d_j V = -alpha d_j u / u and Lap V = -alpha (Lap u / u - |grad u|^2 / u^2),
  /// u = 1 + P_t (exp(-phi/alpha) - 1). Requires t > 0.
  Derivatives derivatives(const TestFunction& phi, double t, std::span<const double> x) const;
  Point gradient(const TestFunction& phi, double t, std::span<const double> x) const;
  double laplacian(const TestFunction& phi, double t, std::span<const double> x) const;

  /// Second-order central differences of value() in space / time.
  Point gradient_fd(const TestFunction& phi, double t, std::span<const double> x,
                    FiniteDifferenceSteps steps = {}) const;
  double laplacian_fd(const TestFunction& phi, double t, std::span<const double> x,
                      FiniteDifferenceSteps steps = {}) const;
  double time_derivative_fd(const TestFunction& phi, double t, std::span<const double> x,
                            FiniteDifferenceSteps steps = {}) const;

  /// |dV/dt - (alpha/2) Lap V + (1/2) |grad V|^2| with dV/dt by central
  /// difference; requires t > steps.time.
  double hj_residual(const TestFunction& phi, double t, std::span<const double> x,
                     FiniteDifferenceSteps steps = {}) const;

 private:
  void check(const TestFunction& phi, double t, std::span<const double> x) const;
  HeatEvaluator heat_;
};

/// True iff V_t lower <= V_t upper + 1e-10 at every probe. Throws
/// PreconditionError unless lower <= upper on the lattice points of order_box.
bool monotonicity_check(const ColeHopf& ch, const TestFunction& lower, const TestFunction& upper, double t,
                        std::span<const Point> probes, const Rectangle& order_box, double grid_step);

struct KappaDomination {
  double constant = 0.0;
  double argmax_time = 0.0;
  Point argmax_point;
};

/// sup over t in [h_t, T] (time_steps uniform points) and the lattice of `box`
/// of (|V| + |dV/dt| + |Lap V| + |grad V|^2) / kappa.
KappaDomination kappa_domination_check(const ColeHopf& ch, const TestFunction& phi, double horizon,
                                       const Rectangle& box, double grid_step, int time_steps = 20,
                                       FiniteDifferenceSteps steps = {});

}  // namespace dklab
