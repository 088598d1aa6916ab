#include "dklab/colehopf.hpp"

#include <algorithm>
#include <cmath>

#include "dklab/errors.hpp"

namespace dklab {

TestFunction exp_shift(const TestFunction& phi, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
  if (phi.family() == Family::Constant) return make_constant(phi.dimension(), std::expm1(-phi.params()[0] / alpha));
  const double inv = 1.0 / alpha;
  return TestFunction::custom(
      phi.dimension(), [phi, inv](std::span<const double> x) { return std::expm1(-inv * phi.value(x)); },
      [phi, inv](std::span<const double> x, std::span<double> out) {
        const double e = std::exp(-inv * phi.value(x));
        phi.gradient(x, out);
        for (double& o : out) o *= -inv * e;
      },
      [phi, inv](std::span<const double> x) {
        const double e = std::exp(-inv * phi.value(x));
        return e * (inv * inv * phi.gradient_norm2(x) - inv * phi.laplacian(x));
      },
      phi.support(), phi.feature_radius());
}

ColeHopf::ColeHopf(HeatEvaluator heat) : heat_(std::move(heat)) {}

ColeHopf::ColeHopf(double alpha, int dimension, int quad_nodes) : heat_(alpha, dimension, quad_nodes) {}

void ColeHopf::check(const TestFunction& phi, double t, std::span<const double> x) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("Cole-Hopf solution needs t >= 0");
  if (phi.dimension() != dimension() || static_cast<int>(x.size()) != dimension())
    throw ParameterError("Cole-Hopf: dimension mismatch");
}

double ColeHopf::value(const TestFunction& phi, double t, std::span<const double> x) const {
  check(phi, t, x);
  if (t == 0.0) return phi.value(x);
  if (phi.family() == Family::Constant) return phi.params()[0];
  const double shifted = heat_.apply(exp_shift(phi, alpha()), t, x);
  if (!(shifted > -1.0)) throw DomainError("P_t exp(-phi/alpha) is not positive; quadrature failed");
  return -alpha() * std::log1p(shifted);
}

double ColeHopf::value_direct(const TestFunction& phi, double t, std::span<const double> x) const {
  check(phi, t, x);
  if (t == 0.0) return phi.value(x);
  const double inv = 1.0 / alpha();
  const Integrand boltzmann{dimension(), [phi, inv](std::span<const double> y) { return std::exp(-inv * phi.value(y)); },
                            std::nullopt};
  const double p = heat_.apply(boltzmann, t, x);
  if (!(p > 0.0)) throw DomainError("P_t exp(-phi/alpha) is not positive; quadrature failed");
  return -alpha() * std::log(p);
}

ColeHopf::Derivatives ColeHopf::derivatives(const TestFunction& phi, double t, std::span<const double> x) const {
  check(phi, t, x);
  if (!(t > 0.0)) throw ParameterError("Cole-Hopf derivatives need t > 0");
  const std::size_t d = static_cast<std::size_t>(dimension());
  if (phi.family() == Family::Constant) return {phi.params()[0], Point(d, 0.0), 0.0};
  const HeatJet jet = heat_.jet(exp_shift(phi, alpha()), t, x);
  const double u = 1.0 + jet.value;
  if (!(u > 0.0)) throw DomainError("P_t exp(-phi/alpha) is not positive; quadrature failed");
  Derivatives out{-alpha() * std::log1p(jet.value), Point(d), 0.0};
  double grad_u2 = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    out.gradient[k] = -alpha() * jet.gradient[k] / u;
    grad_u2 += jet.gradient[k] * jet.gradient[k];
  }
  out.laplacian = -alpha() * (jet.laplacian / u - grad_u2 / (u * u));
  return out;
}

Point ColeHopf::gradient(const TestFunction& phi, double t, std::span<const double> x) const {
  return derivatives(phi, t, x).gradient;
}

double ColeHopf::laplacian(const TestFunction& phi, double t, std::span<const double> x) const {
  return derivatives(phi, t, x).laplacian;
}

Point ColeHopf::gradient_fd(const TestFunction& phi, double t, std::span<const double> x,
                            FiniteDifferenceSteps steps) const {
  check(phi, t, x);
  if (!(t > 0.0)) throw ParameterError("Cole-Hopf derivatives need t > 0");
  const double h = steps.space_rel * (1.0 + std::sqrt(squared_norm(x)));
  Point g(x.size());
  Point y(x.begin(), x.end());
  for (std::size_t k = 0; k < x.size(); ++k) {
    y[k] = x[k] + h;
    const double up = value(phi, t, y);
    y[k] = x[k] - h;
    const double down = value(phi, t, y);
    y[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

double ColeHopf::laplacian_fd(const TestFunction& phi, double t, std::span<const double> x,
                              FiniteDifferenceSteps steps) const {
  check(phi, t, x);
  if (!(t > 0.0)) throw ParameterError("Cole-Hopf derivatives need t > 0");
  const double h = steps.space_rel * (1.0 + std::sqrt(squared_norm(x)));
  const double center = value(phi, t, x);
  Point y(x.begin(), x.end());
  double lap = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    y[k] = x[k] + h;
    const double up = value(phi, t, y);
    y[k] = x[k] - h;
    const double down = value(phi, t, y);
    y[k] = x[k];
    lap += (up - 2.0 * center + down) / (h * h);
  }
  return lap;
}

double ColeHopf::time_derivative_fd(const TestFunction& phi, double t, std::span<const double> x,
                                    FiniteDifferenceSteps steps) const {
  if (!(t >= steps.time)) throw ParameterError("time derivative needs t >= time step");
  return (value(phi, t + steps.time, x) - value(phi, t - steps.time, x)) / (2.0 * steps.time);
}

double ColeHopf::hj_residual(const TestFunction& phi, double t, std::span<const double> x,
                             FiniteDifferenceSteps steps) const {
  if (!(t > steps.time)) throw ParameterError("HJ residual needs t > time step");
  const double dt = time_derivative_fd(phi, t, x, steps);
  const Derivatives d = derivatives(phi, t, x);
  return std::abs(dt - 0.5 * alpha() * d.laplacian + 0.5 * squared_norm(d.gradient));
}

bool monotonicity_check(const ColeHopf& ch, const TestFunction& lower, const TestFunction& upper, double t,
                        std::span<const Point> probes, const Rectangle& order_box, double grid_step) {
  if (!(grid_step > 0.0)) throw ParameterError("grid step must be > 0");
  for_each_lattice_point(order_box, grid_step, [&](std::span<const double> x) {
    if (lower.value(x) > upper.value(x))
      throw PreconditionError("monotonicity check: inputs are not ordered on the grid");
  });
  for (const auto& p : probes)
    if (ch.value(lower, t, p) > ch.value(upper, t, p) + 1e-10) return false;
  return true;
}

KappaDomination kappa_domination_check(const ColeHopf& ch, const TestFunction& phi, double horizon,
                                       const Rectangle& box, double grid_step, int time_steps,
                                       FiniteDifferenceSteps steps) {
  if (!(horizon > steps.time)) throw ParameterError("kappa domination needs T > time step");
  if (time_steps < 2) throw ParameterError("kappa domination needs at least two time points");
  if (!(grid_step > 0.0)) throw ParameterError("grid step must be > 0");
  const TestFunction kappa = make_kappa(ch.dimension());
  KappaDomination out;
  for (int i = 0; i < time_steps; ++i) {
    const double t = steps.time + (horizon - steps.time) * i / (time_steps - 1);
    for_each_lattice_point(box, grid_step, [&](std::span<const double> x) {
      const auto d = ch.derivatives(phi, t, x);
      const double dt = ch.time_derivative_fd(phi, t, x, steps);
      const double ratio =
          (std::abs(d.value) + std::abs(dt) + std::abs(d.laplacian) + squared_norm(d.gradient)) / kappa.value(x);
      if (ratio > out.constant) {
        out.constant = ratio;
        out.argmax_time = t;
        out.argmax_point.assign(x.begin(), x.end());
      }
    });
  }
  return out;
}

}  // namespace dklab
