#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dklab {

using Point = std::vector<double>;

inline double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

/// Closed Euclidean ball.
struct Ball {
  Point center;
  double radius = 0.0;
};

/// Smallest ball containing both arguments.
Ball enclosing_ball(const Ball& a, const Ball& b);

/// Axis-aligned box prod_k [lower_k, upper_k).
///
/// Counting (`contains`) uses the half-open convention; grid helpers treat the
/// box as closed. A box with lower_k == upper_k for some k is empty.
class Rectangle {
 public:
  Rectangle() = default;
  Rectangle(Point lower, Point upper);

  /// [lo, hi)^d
  static Rectangle cube(int dimension, double lo, double hi);

  int dimension() const noexcept { return static_cast<int>(lower_.size()); }
  const Point& lower() const noexcept { return lower_; }
  const Point& upper() const noexcept { return upper_; }

  bool empty() const noexcept;
  double volume() const noexcept;
  bool contains(std::span<const double> x) const noexcept;
  /// Closed containment of another box.
  bool contains(const Rectangle& inner) const noexcept;
  Rectangle padded(double pad) const;

 private:
  Point lower_;
  Point upper_;
};

/// Calls f(point) for every lattice point k * step (k integer) inside the
/// closed box. Anchoring to the global lattice makes grids of nested boxes
/// nested as well.
template <class F>
void for_each_lattice_point(const Rectangle& box, double step, F&& f) {
  const int d = box.dimension();
  if (d == 0) return;
  std::vector<std::int64_t> first(d), last(d), idx(d);
  for (int k = 0; k < d; ++k) {
    first[k] = static_cast<std::int64_t>(std::ceil(box.lower()[k] / step));
    last[k] = static_cast<std::int64_t>(std::floor(box.upper()[k] / step));
    if (first[k] > last[k]) return;
    idx[k] = first[k];
  }
  Point x(d);
  while (true) {
    for (int k = 0; k < d; ++k) x[k] = static_cast<double>(idx[k]) * step;
    f(std::span<const double>(x));
    int k = 0;
    for (; k < d; ++k) {
      if (++idx[k] <= last[k]) break;
      idx[k] = first[k];
    }
    if (k == d) return;
  }
}

}  // namespace dklab
