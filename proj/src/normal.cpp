#include "dklab/normal.hpp"

#include <cmath>
#include <numbers>

namespace dklab {

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_interval(double a, double b) noexcept {
  if (!(a < b)) return 0.0;
  constexpr double s = std::numbers::sqrt2;
  if (a >= 0.0) return 0.5 * (std::erfc(a / s) - std::erfc(b / s));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / s) - std::erfc(-a / s));
  return 1.0 - 0.5 * (std::erfc(-a / s) + std::erfc(b / s));
}

}  // namespace dklab
