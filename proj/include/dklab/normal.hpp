#pragma once

namespace dklab {

/// Standard normal CDF via erfc (full relative accuracy in the lower tail).
double normal_cdf(double z) noexcept;

/// P(a <= xi < b) for a standard normal xi, without cancellation in either tail.
double normal_interval(double a, double b) noexcept;

}  // namespace dklab
