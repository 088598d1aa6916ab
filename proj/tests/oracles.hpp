#pragma once

// Reference computations for the tests. Nothing here calls into the library's
// quadrature, Cole-Hopf or sampling code.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Composite trapezoid on [a, b] with step close to h.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, double h) {
  const long n = static_cast<long>(std::ceil((b - a) / h));
  const double dx = (b - a) / static_cast<double>(n);
  double s = 0.5 * (f(a) + f(b));
  for (long i = 1; i < n; ++i) s += f(a + dx * static_cast<double>(i));
  return s * dx;
}

/// E g(x + sqrt(alpha t) Z) in one dimension.
inline double heat_1d(const std::function<double(double)>& g, double alpha, double t, double x, double h,
                      double window = 12.0) {
  const double s = std::sqrt(alpha * t);
  return trapezoid(
      [&](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * g(x + s * z); }, -window,
      window, h / s);
}

/// E g(x + sqrt(alpha t) Z) in two dimensions (tensor trapezoid).
inline double heat_2d(const std::function<double(double, double)>& g, double alpha, double t, double x0, double x1,
                      double h, double window = 10.0) {
  const double s = std::sqrt(alpha * t);
  return trapezoid(
      [&](double z0) {
        return std::exp(-0.5 * z0 * z0) / std::sqrt(2.0 * std::numbers::pi) *
               trapezoid(
                   [&](double z1) {
                     return std::exp(-0.5 * z1 * z1) / std::sqrt(2.0 * std::numbers::pi) * g(x0 + s * z0, x1 + s * z1);
                   },
                   -window, window, h / s);
      },
      -window, window, h / s);
}

/// Law of the number of successes in independent Bernoulli(p_i) trials, by
/// direct enumeration of all 2^n outcomes (small n only).
inline std::vector<double> bernoulli_sum_pmf(const std::vector<double>& p) {
  const std::size_t n = p.size();
  std::vector<double> pmf(n + 1, 0.0);
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    double prob = 1.0;
    int k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool hit = (mask >> i) & 1ul;
      prob *= hit ? p[i] : 1.0 - p[i];
      k += hit;
    }
    pmf[k] += prob;
  }
  return pmf;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
