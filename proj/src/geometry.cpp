#include "dklab/geometry.hpp"

#include <algorithm>

#include "dklab/errors.hpp"

namespace dklab {

Ball enclosing_ball(const Ball& a, const Ball& b) {
  const double dist = std::sqrt(squared_distance(a.center, b.center));
  if (dist + b.radius <= a.radius) return a;
  if (dist + a.radius <= b.radius) return b;
  const double radius = 0.5 * (dist + a.radius + b.radius);
  Point center(a.center.size());
  const double shift = (radius - a.radius) / dist;
  for (std::size_t k = 0; k < center.size(); ++k)
    center[k] = a.center[k] + shift * (b.center[k] - a.center[k]);
  return {std::move(center), radius};
}

Rectangle::Rectangle(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size())
    throw ParameterError("rectangle corners have different dimensions");
  if (lower_.empty()) throw ParameterError("rectangle must have dimension >= 1");
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    if (!std::isfinite(lower_[k]) || !std::isfinite(upper_[k]))
      throw ParameterError("rectangle corners must be finite");
    if (lower_[k] > upper_[k]) throw ParameterError("rectangle requires lower <= upper in every coordinate");
  }
}

Rectangle Rectangle::cube(int dimension, double lo, double hi) {
  if (dimension < 1) throw ParameterError("dimension must be >= 1");
  return {Point(dimension, lo), Point(dimension, hi)};
}

bool Rectangle::empty() const noexcept {
  for (std::size_t k = 0; k < lower_.size(); ++k)
    if (!(lower_[k] < upper_[k])) return true;
  return false;
}

double Rectangle::volume() const noexcept {
  double v = 1.0;
  for (std::size_t k = 0; k < lower_.size(); ++k) v *= upper_[k] - lower_[k];
  return v;
}

bool Rectangle::contains(std::span<const double> x) const noexcept {
  for (std::size_t k = 0; k < lower_.size(); ++k)
    if (!(lower_[k] <= x[k] && x[k] < upper_[k])) return false;
  return true;
}

bool Rectangle::contains(const Rectangle& inner) const noexcept {
  if (inner.dimension() != dimension()) return false;
  for (std::size_t k = 0; k < lower_.size(); ++k)
    if (inner.lower_[k] < lower_[k] || inner.upper_[k] > upper_[k]) return false;
  return true;
}

Rectangle Rectangle::padded(double pad) const {
  if (pad < 0.0) throw ParameterError("pad must be >= 0");
  Point lo = lower_, hi = upper_;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] -= pad;
    hi[k] += pad;
  }
  return {std::move(lo), std::move(hi)};
}

}  // namespace dklab
