#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "dklab/geometry.hpp"
#include "dklab/rng.hpp"
#include "dklab/testfn.hpp"

namespace dklab {

/// (1/alpha) * sum of unit atoms, stored as a flat row-major coordinate array.
class AtomicMeasure {
 public:
  AtomicMeasure(double alpha, int dimension, std::vector<double> coordinates = {});
  AtomicMeasure(double alpha, const std::vector<Point>& atoms, int dimension);

  double alpha() const noexcept { return alpha_; }
  int dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return coords_.size() / static_cast<std::size_t>(dimension_); }
  bool empty() const noexcept { return coords_.empty(); }
  std::span<const double> atom(std::size_t i) const noexcept {
    return {coords_.data() + i * static_cast<std::size_t>(dimension_), static_cast<std::size_t>(dimension_)};
  }
  std::span<const double> coordinates() const noexcept { return coords_; }

  /// size() / alpha
  double total_mass() const noexcept { return static_cast<double>(size()) / alpha_; }
  /// Same atoms, different weight.
  AtomicMeasure with_alpha(double alpha) const;

  bool operator==(const AtomicMeasure&) const = default;

 private:
  double alpha_;
  int dimension_;
  std::vector<double> coords_;
};

/// (1/alpha) * sum_i f(x_i) over a flat coordinate array.
double pair_points(double alpha, int dimension, std::span<const double> coordinates, const TestFunction& f);

/// <mu, f>
double pair(const AtomicMeasure& mu, const TestFunction& f);

/// Number of atoms in the half-open rectangle (alpha * mu(A)).
std::size_t count_atoms(const AtomicMeasure& mu, const Rectangle& a);

/// mu(A) = count / alpha.
double count_in_rect(const AtomicMeasure& mu, const Rectangle& a);

/// Homogeneous Poisson process of intensity lambda on box.padded(pad); alpha = 1.
AtomicMeasure sample_poisson(double lambda, const Rectangle& box, double pad, ReplicaRng& rng);

enum class InitialKind { ExplicitList, SqrtLogLattice, PoissonOnBox };

struct InitialFamily {
  InitialKind kind = InitialKind::ExplicitList;
  AtomicMeasure atoms{1.0, 1};
  std::size_t truncation = 0;  // K for SqrtLogLattice
  double intensity = 0.0;      // lambda for PoissonOnBox
};

/// Atoms sqrt(ln k) e_1 for k = 1..K (alpha = 1), a finite truncation of a
/// locally finite but non-tempered initial condition.
InitialFamily make_sqrt_log_family(std::size_t truncation, int dimension);

/// CSV: header row `alpha=<a>,d=<d>`, then column names x_1..x_d, then one row per atom.
void write_atoms_csv(std::ostream& out, const AtomicMeasure& mu);
AtomicMeasure read_atoms_csv(std::istream& in);

}  // namespace dklab
