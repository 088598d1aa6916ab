#pragma once

#include <functional>
#include <memory>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dklab/geometry.hpp"

namespace dklab {

enum class Family { GaussianBump, CompactBump, Kappa, Constant, Custom };

std::string_view to_string(Family family) noexcept;

/// Smooth, rapidly decreasing test function with exact gradient and Laplacian.
///
/// Instances are immutable and cheap to copy (shared model), so they can be
/// evaluated concurrently from any number of threads.
///
/// `support()` is a ball outside of which the function vanishes, either
/// exactly (compact bumps) or below 1e-21 relative to its amplitude (Gaussian
/// bumps). Heat quadrature restricts itself to it.
///
/// `feature_radius()` is the radius of the narrowest structure: the support
/// radius of a single bump, 4 for kappa (its analytic strip has half-width 1),
/// the smallest one over the terms of a sum, and infinity when unknown.
/// Quadrature panels never exceed this length.
class TestFunction;

struct LinearTerm;

class TestFunction {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

  static TestFunction custom(int dimension, ValueFn value, GradientFn gradient, ValueFn laplacian,
                             std::optional<Ball> support = std::nullopt,
                             double feature_radius = std::numeric_limits<double>::infinity());

  int dimension() const noexcept;
  Family family() const noexcept;
  /// Family parameters: GaussianBump/CompactBump -> (center..., width|radius, amplitude);
  /// Constant -> (c); Kappa and Custom -> empty.
  std::span<const double> params() const noexcept;
  const std::optional<Ball>& support() const noexcept;
  double feature_radius() const noexcept;
  /// For sums and rescaled sums: the terms c_i f_i. Empty otherwise.
  std::span<const LinearTerm> terms() const noexcept;

  double operator()(std::span<const double> x) const { return value(x); }
  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  Point gradient(std::span<const double> x) const;
  double laplacian(std::span<const double> x) const;
  double gradient_norm2(std::span<const double> x) const;

 private:
  struct Model;
  explicit TestFunction(std::shared_ptr<const Model> model);
  std::shared_ptr<const Model> model_;

  friend TestFunction make_gaussian_bump(int, Point, double, double);
  friend TestFunction make_compact_bump(int, Point, double, double);
  friend TestFunction make_kappa(int);
  friend TestFunction make_constant(int, double);
  friend TestFunction operator*(double, const TestFunction&);
  friend TestFunction operator+(const TestFunction&, const TestFunction&);
};

struct LinearTerm {
  double coefficient = 1.0;
  TestFunction function;
};

/// a * exp(-|x - center|^2 / (2 width^2))
TestFunction make_gaussian_bump(int dimension, Point center, double width, double amplitude);

/// a * exp(-r^2 / (r^2 - |x - center|^2)) inside the open ball of radius r, 0 outside.
TestFunction make_compact_bump(int dimension, Point center, double radius, double amplitude);

/// exp(-sqrt(1 + |x|^2)): smooth, strictly positive, exponential tails.
TestFunction make_kappa(int dimension);

TestFunction make_constant(int dimension, double value);

/// c * f. Closed-form families keep their family with a rescaled amplitude.
TestFunction operator*(double c, const TestFunction& f);
TestFunction operator+(const TestFunction& f, const TestFunction& g);
TestFunction operator-(const TestFunction& f, const TestFunction& g);

struct BumpParams {
  Point center;
  double width = 0.0;  // sigma for Gaussian bumps, radius for compact bumps
  double amplitude = 0.0;
};

/// Parameters of a GaussianBump or CompactBump; ParameterError for other families.
BumpParams bump_params(const TestFunction& f);

/// ||f||_{beta,n} = sup |x|^n |D^beta f(x)|.
struct Seminorm {
  std::vector<int> multi_index;
  int power = 0;
};

/// Grid lower bound of a seminorm over the lattice points of `box`.
///
/// |beta| <= 2 only. Second derivatives come from the Laplacian in d = 1 and
/// from central differences of the analytic gradient otherwise.
double seminorm_sup(const TestFunction& f, const Seminorm& s, const Rectangle& box, double grid_step);

struct KappaBounds {
  double gradient_ratio = 0.0;   // sup |grad k|^2 / k
  double laplacian_ratio = 0.0;  // sup |lap k| / k
};

/// Empirical constants C with |grad k|^2 <= C k and |lap k| <= C k on the grid.
/// Throws InvariantError if k <= 0 at a grid point.
KappaBounds kappa_bound_check(const TestFunction& kappa, const Rectangle& box, double grid_step);

}  // namespace dklab
