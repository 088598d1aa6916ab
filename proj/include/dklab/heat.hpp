#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dklab/geometry.hpp"
#include "dklab/measure.hpp"
#include "dklab/testfn.hpp"

namespace dklab {

/// Scalar field to be smoothed by the heat semigroup.
///
/// `support`, when set, is a ball outside of which the field vanishes (or is
/// negligible); quadrature is then restricted to it.
struct Integrand {
  int dimension = 1;
  std::function<double(std::span<const double>)> f;
  std::optional<Ball> support;
  double feature_radius = std::numeric_limits<double>::infinity();
};

Integrand value_integrand(const TestFunction& phi);
/// |grad phi|^2
Integrand gradient_norm2_integrand(const TestFunction& phi);
/// phi^2
Integrand square_integrand(const TestFunction& phi);

/// P_t f(x) together with its spatial gradient and Laplacian.
struct HeatJet {
  double value = 0.0;
  Point gradient;
  double laplacian = 0.0;
};

/// Heat semigroup P_t with generator (alpha/2) Laplacian:
/// P_t f(x) = E f(x + sqrt(alpha t) xi), xi standard Gaussian.
///
/// Gaussian bumps and constants are evaluated in closed form. Other functions
/// go through tensor quadrature (d <= 3):
///  - with a known support ball, Gauss-Legendre over the intersection of the
///    support box with the window x +- 10 sqrt(alpha t) against the exact
///    Gaussian kernel;
///  - otherwise Gauss-Hermite in the kernel variable.
/// All weights are positive, so non-negative inputs give non-negative outputs.
class HeatEvaluator {
 public:
  static constexpr int kDefaultNodes = 64;
  static constexpr int kMinNodes = 8;
  static constexpr int kMaxQuadratureDimension = 3;

  HeatEvaluator(double alpha, int dimension, int quad_nodes = kDefaultNodes);

  double alpha() const noexcept { return alpha_; }
  int dimension() const noexcept { return dimension_; }
  int quad_nodes() const noexcept { return quad_nodes_; }

  double apply(const TestFunction& phi, double t, std::span<const double> x) const;
  double apply(const Integrand& f, double t, std::span<const double> x) const;

  /// P_t phi, grad P_t phi = P_t grad phi and Laplacian P_t phi = P_t Laplacian phi.
  HeatJet jet(const TestFunction& phi, double t, std::span<const double> x) const;

  /// P_t 1_A(x) for the half-open rectangle A; t > 0.
  double indicator(const Rectangle& a, double t, std::span<const double> x) const;

  /// <nu, P_t phi>
  double pair(const AtomicMeasure& nu, const TestFunction& phi, double t) const;
  double pair(const AtomicMeasure& nu, const Integrand& f, double t) const;

 private:
  // Integrates the m-vector valued field against the heat kernel at (t, x).
  void integrate(const std::function<void(std::span<const double>, std::span<double>)>& field, std::size_t m,
                 const std::optional<Ball>& support, double feature_radius, double t, std::span<const double> x,
                 std::span<double> result) const;
  void check_point(std::span<const double> x) const;

  double alpha_;
  int dimension_;
  int quad_nodes_;
  std::vector<double> hermite_nodes_, hermite_weights_;
  std::vector<double> legendre_nodes_, legendre_weights_;
};

/// Closed form of P_t applied to a Gaussian bump: a Gaussian bump of variance
/// width^2 + alpha t and amplitude a (width^2 / (width^2 + alpha t))^{d/2}.
TestFunction heat_evolved_gaussian(const TestFunction& gaussian, double alpha, double t);

}  // namespace dklab
