#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dklab/measure.hpp"
#include "dklab/rng.hpp"
#include "dklab/testfn.hpp"

namespace dklab {

/// N independent Brownian particles run at speed alpha, so that the empirical
/// measure (1/alpha) sum_i delta_{B^i_{alpha t}} solves the noise-only
/// Dean-Kawasaki equation started from the initial atoms.
///
/// Transitions are sampled exactly: over a step dt every coordinate gets an
/// independent N(0, alpha dt) increment.
class ParticleEnsemble {
 public:
  ParticleEnsemble(const AtomicMeasure& initial, std::uint64_t master_seed, std::uint64_t replica_id);

  double alpha() const noexcept { return alpha_; }
  int dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return positions_.size() / static_cast<std::size_t>(dimension_); }
  double time() const noexcept { return time_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t replica_id() const noexcept { return replica_id_; }
  std::span<const double> positions() const noexcept { return positions_; }
  std::span<const double> particle(std::size_t i) const noexcept {
    return {positions_.data() + i * dimension_, static_cast<std::size_t>(dimension_)};
  }

  /// In-place exact transition over dt > 0.
  void advance(double dt);

  AtomicMeasure measure() const { return {alpha_, dimension_, positions_}; }
  double pair(const TestFunction& f) const { return pair_points(alpha_, dimension_, positions_, f); }
  std::size_t count_in(const Rectangle& a) const;

 private:
  double alpha_;
  int dimension_;
  std::vector<double> positions_;
  double time_ = 0.0;
  std::uint64_t master_seed_;
  std::uint64_t replica_id_;
  ReplicaRng rng_;
};

ParticleEnsemble init_ensemble(const AtomicMeasure& initial, std::uint64_t master_seed, std::uint64_t replica_id);

/// Copy of `ensemble` advanced by dt.
ParticleEnsemble evolve(ParticleEnsemble ensemble, double dt);

/// The three integrands of the martingale problem along one path.
struct PathTrace {
  std::vector<double> pair;                   // <mu_t, phi>
  std::vector<double> pair_laplacian;         // <mu_t, Lap phi>
  std::vector<double> pair_gradient_norm2;    // <mu_t, |grad phi|^2>
};

struct PathRecord {
  std::uint64_t replica_id = 0;
  std::vector<double> time_grid;
  std::vector<AtomicMeasure> snapshots;  // empty unless requested
  std::vector<PathTrace> traces;         // one per test function
};

/// Uniform grid 0, T/steps, ..., T.
std::vector<double> uniform_grid(double horizon, std::size_t steps);

/// Simulates one replica across `time_grid` (strictly increasing, starting at 0).
PathRecord sample_path(const AtomicMeasure& initial, std::span<const double> time_grid,
                       std::span<const TestFunction> functions, std::uint64_t master_seed, std::uint64_t replica_id,
                       bool keep_snapshots = true);

/// CSV columns: replica_id,t,phi_id,pair,pair_lap,pair_gradsq
void write_path_csv(std::ostream& out, std::span<const PathRecord> records);

/// Trapezoid rule over a grid.
double trapezoid(std::span<const double> grid, std::span<const double> values);

}  // namespace dklab
