#include "dklab/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dklab/errors.hpp"

namespace dklab {

struct TestFunction::Model {
  int dimension = 1;
  Family family = Family::Custom;
  std::vector<double> params;
  std::optional<Ball> support;
  double feature_radius = std::numeric_limits<double>::infinity();
  std::vector<LinearTerm> terms;
  ValueFn value;
  GradientFn gradient;
  ValueFn laplacian;
};

namespace {

// Gaussian tails beyond 10 widths are below exp(-50) of the amplitude.
constexpr double kGaussianSupportWidths = 10.0;

void require_dimension(int d) {
  if (d < 1) throw ParameterError("dimension must be >= 1, got " + std::to_string(d));
}

void require_center(int d, const Point& center) {
  if (static_cast<int>(center.size()) != d)
    throw ParameterError("center has " + std::to_string(center.size()) + " coordinates, expected " +
                         std::to_string(d));
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::GaussianBump: return "gaussian";
    case Family::CompactBump: return "compact";
    case Family::Kappa: return "kappa";
    case Family::Constant: return "constant";
    case Family::Custom: return "custom";
  }
  return "unknown";
}

TestFunction::TestFunction(std::shared_ptr<const Model> model) : model_(std::move(model)) {}

TestFunction TestFunction::custom(int dimension, ValueFn value, GradientFn gradient, ValueFn laplacian,
                                  std::optional<Ball> support, double feature_radius) {
  require_dimension(dimension);
  if (!value || !gradient || !laplacian)
    throw ParameterError("custom test function needs value, gradient and laplacian");
  if (support) require_center(dimension, support->center);
  auto m = std::make_shared<Model>();
  m->dimension = dimension;
  m->family = Family::Custom;
  m->support = std::move(support);
  m->feature_radius = feature_radius;
  m->value = std::move(value);
  m->gradient = std::move(gradient);
  m->laplacian = std::move(laplacian);
  return TestFunction(std::move(m));
}

int TestFunction::dimension() const noexcept { return model_->dimension; }
Family TestFunction::family() const noexcept { return model_->family; }
std::span<const double> TestFunction::params() const noexcept { return model_->params; }
const std::optional<Ball>& TestFunction::support() const noexcept { return model_->support; }
double TestFunction::feature_radius() const noexcept { return model_->feature_radius; }
std::span<const LinearTerm> TestFunction::terms() const noexcept { return model_->terms; }

double TestFunction::value(std::span<const double> x) const { return model_->value(x); }

void TestFunction::gradient(std::span<const double> x, std::span<double> out) const {
  model_->gradient(x, out);
}

Point TestFunction::gradient(std::span<const double> x) const {
  Point g(model_->dimension);
  model_->gradient(x, g);
  return g;
}

double TestFunction::laplacian(std::span<const double> x) const { return model_->laplacian(x); }

double TestFunction::gradient_norm2(std::span<const double> x) const {
  double buf[8];
  std::vector<double> heap;
  std::span<double> g;
  if (model_->dimension <= 8) {
    g = std::span<double>(buf, model_->dimension);
  } else {
    heap.resize(model_->dimension);
    g = heap;
  }
  model_->gradient(x, g);
  return squared_norm(g);
}

TestFunction make_gaussian_bump(int dimension, Point center, double width, double amplitude) {
  require_dimension(dimension);
  require_center(dimension, center);
  if (!(width > 0.0)) throw ParameterError("gaussian bump width must be > 0");
  auto m = std::make_shared<TestFunction::Model>();
  m->dimension = dimension;
  m->family = Family::GaussianBump;
  m->params = center;
  m->params.push_back(width);
  m->params.push_back(amplitude);
  m->support = Ball{center, kGaussianSupportWidths * width};
  m->feature_radius = kGaussianSupportWidths * width;
  const double inv_var = 1.0 / (width * width);
  m->value = [center, inv_var, amplitude](std::span<const double> x) {
    return amplitude * std::exp(-0.5 * squared_distance(x, center) * inv_var);
  };
  m->gradient = [center, inv_var, amplitude](std::span<const double> x, std::span<double> out) {
    const double v = amplitude * std::exp(-0.5 * squared_distance(x, center) * inv_var);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = -v * (x[k] - center[k]) * inv_var;
  };
  m->laplacian = [center, inv_var, amplitude, dimension](std::span<const double> x) {
    const double r2 = squared_distance(x, center);
    const double v = amplitude * std::exp(-0.5 * r2 * inv_var);
    return v * (r2 * inv_var * inv_var - dimension * inv_var);
  };
  return TestFunction(std::move(m));
}

TestFunction make_compact_bump(int dimension, Point center, double radius, double amplitude) {
  require_dimension(dimension);
  require_center(dimension, center);
  if (!(radius > 0.0)) throw ParameterError("compact bump radius must be > 0");
  auto m = std::make_shared<TestFunction::Model>();
  m->dimension = dimension;
  m->family = Family::CompactBump;
  m->params = center;
  m->params.push_back(radius);
  m->params.push_back(amplitude);
  m->support = Ball{center, radius};
  m->feature_radius = radius;
  const double r2 = radius * radius;
  // phi = a exp(g), g = -r^2 / u, u = r^2 - rho^2.
  m->value = [center, r2, amplitude](std::span<const double> x) {
    const double u = r2 - squared_distance(x, center);
    if (u <= 0.0) return 0.0;
    return amplitude * std::exp(-r2 / u);
  };
  m->gradient = [center, r2, amplitude](std::span<const double> x, std::span<double> out) {
    const double u = r2 - squared_distance(x, center);
    const double v = u > 0.0 ? amplitude * std::exp(-r2 / u) : 0.0;
    if (v == 0.0) {
      for (double& o : out) o = 0.0;
      return;
    }
    const double scale = -2.0 * r2 / (u * u);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = v * scale * (x[k] - center[k]);
  };
  m->laplacian = [center, r2, amplitude, dimension](std::span<const double> x) {
    const double rho2 = squared_distance(x, center);
    const double u = r2 - rho2;
    const double v = u > 0.0 ? amplitude * std::exp(-r2 / u) : 0.0;
    if (v == 0.0) return 0.0;
    const double u2 = u * u;
    const double grad_g2 = 4.0 * r2 * r2 * rho2 / (u2 * u2);
    const double lap_g = -2.0 * r2 * (dimension / u2 + 4.0 * rho2 / (u2 * u));
    return v * (grad_g2 + lap_g);
  };
  return TestFunction(std::move(m));
}

TestFunction make_kappa(int dimension) {
  require_dimension(dimension);
  auto m = std::make_shared<TestFunction::Model>();
  m->dimension = dimension;
  m->family = Family::Kappa;
  // Analytic in the strip |Im x| < 1; Gauss-Legendre panels of this length resolve it.
  m->feature_radius = 4.0;
  m->value = [](std::span<const double> x) { return std::exp(-std::sqrt(1.0 + squared_norm(x))); };
  m->gradient = [](std::span<const double> x, std::span<double> out) {
    const double s = std::sqrt(1.0 + squared_norm(x));
    const double v = std::exp(-s);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = -v * x[k] / s;
  };
  m->laplacian = [dimension](std::span<const double> x) {
    const double r2 = squared_norm(x);
    const double s = std::sqrt(1.0 + r2);
    const double v = std::exp(-s);
    return v * (r2 / (s * s) - dimension / s + r2 / (s * s * s));
  };
  return TestFunction(std::move(m));
}

TestFunction make_constant(int dimension, double value) {
  require_dimension(dimension);
  auto m = std::make_shared<TestFunction::Model>();
  m->dimension = dimension;
  m->family = Family::Constant;
  m->params = {value};
  if (value == 0.0) m->support = Ball{Point(dimension, 0.0), 0.0};
  m->value = [value](std::span<const double>) { return value; };
  m->gradient = [](std::span<const double>, std::span<double> out) {
    for (double& o : out) o = 0.0;
  };
  m->laplacian = [](std::span<const double>) { return 0.0; };
  return TestFunction(std::move(m));
}

BumpParams bump_params(const TestFunction& f) {
  if (f.family() != Family::GaussianBump && f.family() != Family::CompactBump)
    throw ParameterError("bump_params requires a gaussian or compact bump");
  const auto p = f.params();
  const std::size_t d = static_cast<std::size_t>(f.dimension());
  return {Point(p.begin(), p.begin() + d), p[d], p[d + 1]};
}

namespace {

std::vector<LinearTerm> as_terms(const TestFunction& f) {
  if (!f.terms().empty()) return {f.terms().begin(), f.terms().end()};
  return {LinearTerm{1.0, f}};
}

}  // namespace

TestFunction operator*(double c, const TestFunction& f) {
  switch (f.family()) {
    case Family::GaussianBump: {
      auto b = bump_params(f);
      return make_gaussian_bump(f.dimension(), b.center, b.width, c * b.amplitude);
    }
    case Family::CompactBump: {
      auto b = bump_params(f);
      return make_compact_bump(f.dimension(), b.center, b.width, c * b.amplitude);
    }
    case Family::Constant: return make_constant(f.dimension(), c * f.params()[0]);
    default: break;
  }
  TestFunction out = TestFunction::custom(
      f.dimension(), [f, c](std::span<const double> x) { return c * f.value(x); },
      [f, c](std::span<const double> x, std::span<double> out) {
        f.gradient(x, out);
        for (double& o : out) o *= c;
      },
      [f, c](std::span<const double> x) { return c * f.laplacian(x); }, f.support(), f.feature_radius());
  auto terms = as_terms(f);
  for (auto& term : terms) term.coefficient *= c;
  std::const_pointer_cast<TestFunction::Model>(out.model_)->terms = std::move(terms);
  return out;
}

TestFunction operator+(const TestFunction& f, const TestFunction& g) {
  if (f.dimension() != g.dimension()) throw ParameterError("cannot add test functions of different dimension");
  std::optional<Ball> support;
  if (f.support() && g.support()) support = enclosing_ball(*f.support(), *g.support());
  TestFunction out = TestFunction::custom(
      f.dimension(), [f, g](std::span<const double> x) { return f.value(x) + g.value(x); },
      [f, g](std::span<const double> x, std::span<double> out) {
        f.gradient(x, out);
        const Point h = g.gradient(x);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += h[k];
      },
      [f, g](std::span<const double> x) { return f.laplacian(x) + g.laplacian(x); }, support,
      std::min(f.feature_radius(), g.feature_radius()));
  auto terms = as_terms(f);
  for (auto& term : as_terms(g)) terms.push_back(std::move(term));
  std::const_pointer_cast<TestFunction::Model>(out.model_)->terms = std::move(terms);
  return out;
}

TestFunction operator-(const TestFunction& f, const TestFunction& g) { return f + (-1.0) * g; }

namespace {

// D^beta f for |beta| <= 2.
double partial_derivative(const TestFunction& f, std::span<const int> beta, std::span<const double> x) {
  const int order = std::accumulate(beta.begin(), beta.end(), 0);
  if (order == 0) return f.value(x);
  if (order == 1) {
    const auto it = std::find(beta.begin(), beta.end(), 1);
    return f.gradient(x)[static_cast<std::size_t>(it - beta.begin())];
  }
  if (f.dimension() == 1) return f.laplacian(x);
  // Second derivative d_i d_j by central differences of the analytic gradient.
  int i = -1, j = -1;
  for (int k = 0; k < static_cast<int>(beta.size()); ++k) {
    if (beta[k] == 2) i = j = k;
    if (beta[k] == 1) (i < 0 ? i : j) = k;
  }
  const double h = 1e-5 * (1.0 + std::sqrt(squared_norm(x)));
  Point xp(x.begin(), x.end()), xm(x.begin(), x.end());
  xp[i] += h;
  xm[i] -= h;
  return (f.gradient(xp)[j] - f.gradient(xm)[j]) / (2.0 * h);
}

}  // namespace

double seminorm_sup(const TestFunction& f, const Seminorm& s, const Rectangle& box, double grid_step) {
  if (static_cast<int>(s.multi_index.size()) != f.dimension())
    throw ParameterError("multi-index length must equal the dimension");
  if (box.dimension() != f.dimension()) throw ParameterError("box dimension mismatch");
  if (s.power < 0) throw ParameterError("seminorm power must be >= 0");
  int order = 0;
  for (int b : s.multi_index) {
    if (b < 0) throw ParameterError("multi-index entries must be >= 0");
    order += b;
  }
  if (order > 2) throw UnsupportedError("seminorms with |beta| > 2 are not supported");
  if (!(grid_step > 0.0)) throw ParameterError("grid step must be > 0");
  double best = 0.0;
  for_each_lattice_point(box, grid_step, [&](std::span<const double> x) {
    const double weight = s.power == 0 ? 1.0 : std::pow(std::sqrt(squared_norm(x)), s.power);
    best = std::max(best, weight * std::abs(partial_derivative(f, s.multi_index, x)));
  });
  return best;
}

KappaBounds kappa_bound_check(const TestFunction& kappa, const Rectangle& box, double grid_step) {
  if (box.dimension() != kappa.dimension()) throw ParameterError("box dimension mismatch");
  if (!(grid_step > 0.0)) throw ParameterError("grid step must be > 0");
  KappaBounds bounds;
  for_each_lattice_point(box, grid_step, [&](std::span<const double> x) {
    const double k = kappa.value(x);
    if (!(k > 0.0)) throw InvariantError("weight function is not strictly positive on the grid");
    bounds.gradient_ratio = std::max(bounds.gradient_ratio, kappa.gradient_norm2(x) / k);
    bounds.laplacian_ratio = std::max(bounds.laplacian_ratio, std::abs(kappa.laplacian(x)) / k);
  });
  return bounds;
}

}  // namespace dklab
