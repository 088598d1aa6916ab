#include "dklab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dklab/errors.hpp"
#include "dklab/normal.hpp"
#include "dklab/quadrature.hpp"

namespace dklab {

namespace {

// Kernel window half-width in standard deviations; exp(-50) truncation.
constexpr double kWindowSigmas = 10.0;
// Upper bound on tensor quadrature nodes per evaluation; limits panels in d >= 2.
constexpr double kMaxTensorNodes = 4194304.0;
// Panel length in feature radii.
constexpr double kPanelFeatureRadii = 1.0;

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("heat semigroup needs t >= 0");
}

}  // namespace

Integrand value_integrand(const TestFunction& phi) {
  return {phi.dimension(), [phi](std::span<const double> x) { return phi.value(x); }, phi.support(), phi.feature_radius()};
}

Integrand gradient_norm2_integrand(const TestFunction& phi) {
  return {phi.dimension(), [phi](std::span<const double> x) { return phi.gradient_norm2(x); }, phi.support(), phi.feature_radius()};
}

Integrand square_integrand(const TestFunction& phi) {
  return {phi.dimension(),
          [phi](std::span<const double> x) {
            const double v = phi.value(x);
            return v * v;
          },
          phi.support(), phi.feature_radius()};
}

TestFunction heat_evolved_gaussian(const TestFunction& gaussian, double alpha, double t) {
  require_time(t);
  const auto b = bump_params(gaussian);
  if (gaussian.family() != Family::GaussianBump) throw ParameterError("expected a gaussian bump");
  const double var0 = b.width * b.width;
  const double var = var0 + alpha * t;
  const double amp = b.amplitude * std::pow(var0 / var, 0.5 * gaussian.dimension());
  return make_gaussian_bump(gaussian.dimension(), b.center, std::sqrt(var), amp);
}

HeatEvaluator::HeatEvaluator(double alpha, int dimension, int quad_nodes)
    : alpha_(alpha), dimension_(dimension), quad_nodes_(quad_nodes) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be > 0");
  if (dimension < 1) throw ParameterError("dimension must be >= 1");
  if (quad_nodes < kMinNodes)
    throw ParameterError("quad_nodes must be >= " + std::to_string(kMinNodes));
  auto gh = gauss_hermite(quad_nodes);
  hermite_nodes_ = std::move(gh.nodes);
  hermite_weights_ = std::move(gh.weights);
  auto gl = gauss_legendre(quad_nodes);
  legendre_nodes_ = std::move(gl.nodes);
  legendre_weights_ = std::move(gl.weights);
}

void HeatEvaluator::check_point(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension_) throw ParameterError("heat evaluation point has wrong dimension");
}

void HeatEvaluator::integrate(const std::function<void(std::span<const double>, std::span<double>)>& field,
                              std::size_t m, const std::optional<Ball>& support, double feature_radius, double t,
                              std::span<const double> x, std::span<double> result) const {
  if (dimension_ > kMaxQuadratureDimension)
    throw UnsupportedError("heat quadrature supports d <= 3; got d = " + std::to_string(dimension_));
  for (std::size_t j = 0; j < m; ++j) result[j] = 0.0;
  const double sigma = std::sqrt(alpha_ * t);
  const int d = dimension_;

  // Per-axis abscissae and weights (kernel included). With a support or a
  // finite feature radius the kernel window is split into equal
  // Gauss-Legendre panels no longer than the feature radius; otherwise
  // Gauss-Hermite.
  const bool panelled = support.has_value() || (std::isfinite(feature_radius) && feature_radius > 0.0);
  std::vector<double> lo(d), hi(d);
  std::size_t panels = 1;
  if (panelled) {
    double widest = 0.0;
    for (int k = 0; k < d; ++k) {
      lo[k] = x[k] - kWindowSigmas * sigma;
      hi[k] = x[k] + kWindowSigmas * sigma;
      if (support) {
        lo[k] = std::max(lo[k], support->center[k] - support->radius);
        hi[k] = std::min(hi[k], support->center[k] + support->radius);
      }
      if (!(lo[k] < hi[k])) return;
      widest = std::max(widest, hi[k] - lo[k]);
    }
    if (std::isfinite(feature_radius) && feature_radius > 0.0) {
      const double q = static_cast<double>(quad_nodes_);
      const double budget = std::max(1.0, std::floor(std::pow(kMaxTensorNodes, 1.0 / d) / q));
      panels = static_cast<std::size_t>(
          std::clamp(std::ceil(widest / (kPanelFeatureRadii * feature_radius) - 1e-9), 1.0, budget));
    }
  }
  const std::size_t n = static_cast<std::size_t>(quad_nodes_) * panels;
  std::vector<double> ys(d * n), ws(d * n);
  if (panelled) {
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    const std::size_t q = static_cast<std::size_t>(quad_nodes_);
    for (int k = 0; k < d; ++k) {
      const double half = 0.5 * (hi[k] - lo[k]) / static_cast<double>(panels);
      for (std::size_t p = 0; p < panels; ++p) {
        const double mid = lo[k] + half * static_cast<double>(2 * p + 1);
        for (std::size_t i = 0; i < q; ++i) {
          const double y = mid + half * legendre_nodes_[i];
          const double z = (y - x[k]) / sigma;
          ys[k * n + p * q + i] = y;
          ws[k * n + p * q + i] = half * legendre_weights_[i] * norm * std::exp(-0.5 * z * z);
        }
      }
    }
  } else {
    const double scale = std::numbers::sqrt2 * sigma;
    const double norm = 1.0 / std::sqrt(std::numbers::pi);
    for (int k = 0; k < d; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        ys[k * n + i] = x[k] + scale * hermite_nodes_[i];
        ws[k * n + i] = hermite_weights_[i] * norm;
      }
  }

  std::vector<std::size_t> idx(d, 0);
  Point y(d);
  std::vector<double> values(m);
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      y[k] = ys[k * n + idx[k]];
      w *= ws[k * n + idx[k]];
    }
    if (w != 0.0) {
      field(y, values);
      for (std::size_t j = 0; j < m; ++j) result[j] += w * values[j];
    }
    int k = 0;
    for (; k < d; ++k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
    if (k == d) break;
  }
}

double HeatEvaluator::apply(const TestFunction& phi, double t, std::span<const double> x) const {
  require_time(t);
  check_point(x);
  if (phi.dimension() != dimension_) throw ParameterError("test function dimension mismatch");
  if (t == 0.0) return phi.value(x);
  if (!phi.terms().empty()) {
    double sum = 0.0;
    for (const auto& term : phi.terms()) sum += term.coefficient * apply(term.function, t, x);
    return sum;
  }
  switch (phi.family()) {
    case Family::Constant: return phi.params()[0];
    case Family::GaussianBump: return heat_evolved_gaussian(phi, alpha_, t).value(x);
    default: return apply(value_integrand(phi), t, x);
  }
}

double HeatEvaluator::apply(const Integrand& f, double t, std::span<const double> x) const {
  require_time(t);
  check_point(x);
  if (f.dimension != dimension_) throw ParameterError("integrand dimension mismatch");
  if (t == 0.0) return f.f(x);
  double result = 0.0;
  integrate([&f](std::span<const double> y, std::span<double> out) { out[0] = f.f(y); }, 1, f.support, f.feature_radius, t, x,
            {&result, 1});
  return result;
}

HeatJet HeatEvaluator::jet(const TestFunction& phi, double t, std::span<const double> x) const {
  require_time(t);
  check_point(x);
  if (phi.dimension() != dimension_) throw ParameterError("test function dimension mismatch");
  const std::size_t d = static_cast<std::size_t>(dimension_);
  HeatJet out{0.0, Point(d, 0.0), 0.0};
  if (t > 0.0 && !phi.terms().empty()) {
    for (const auto& term : phi.terms()) {
      const HeatJet part = jet(term.function, t, x);
      out.value += term.coefficient * part.value;
      for (std::size_t k = 0; k < d; ++k) out.gradient[k] += term.coefficient * part.gradient[k];
      out.laplacian += term.coefficient * part.laplacian;
    }
    return out;
  }
  if (t == 0.0 || phi.family() == Family::Constant || phi.family() == Family::GaussianBump) {
    const TestFunction g = (t > 0.0 && phi.family() == Family::GaussianBump) ? heat_evolved_gaussian(phi, alpha_, t)
                                                                             : phi;
    out.value = phi.family() == Family::Constant ? phi.params()[0] : g.value(x);
    g.gradient(x, out.gradient);
    out.laplacian = g.laplacian(x);
    return out;
  }
  std::vector<double> acc(d + 2);
  integrate(
      [&phi, d](std::span<const double> y, std::span<double> v) {
        v[0] = phi.value(y);
        phi.gradient(y, v.subspan(1, d));
        v[d + 1] = phi.laplacian(y);
      },
      d + 2, phi.support(), phi.feature_radius(), t, x, acc);
  out.value = acc[0];
  for (std::size_t k = 0; k < d; ++k) out.gradient[k] = acc[1 + k];
  out.laplacian = acc[d + 1];
  return out;
}

double HeatEvaluator::indicator(const Rectangle& a, double t, std::span<const double> x) const {
  if (!(t > 0.0)) throw ParameterError("heat of an indicator needs t > 0");
  check_point(x);
  if (a.dimension() != dimension_) throw ParameterError("rectangle dimension mismatch");
  if (a.empty()) return 0.0;
  const double sigma = std::sqrt(alpha_ * t);
  double p = 1.0;
  for (int k = 0; k < dimension_; ++k)
    p *= normal_interval((a.lower()[k] - x[k]) / sigma, (a.upper()[k] - x[k]) / sigma);
  return p;
}

double HeatEvaluator::pair(const AtomicMeasure& nu, const TestFunction& phi, double t) const {
  if (nu.dimension() != dimension_) throw ParameterError("measure dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) sum += apply(phi, t, nu.atom(i));
  return sum / nu.alpha();
}

double HeatEvaluator::pair(const AtomicMeasure& nu, const Integrand& f, double t) const {
  if (nu.dimension() != dimension_) throw ParameterError("measure dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) sum += apply(f, t, nu.atom(i));
  return sum / nu.alpha();
}

}  // namespace dklab
