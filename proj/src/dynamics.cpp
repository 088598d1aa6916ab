#include "dklab/dynamics.hpp"

#include <cmath>
#include <ostream>

#include "dklab/csv.hpp"
#include "dklab/errors.hpp"

namespace dklab {

ParticleEnsemble::ParticleEnsemble(const AtomicMeasure& initial, std::uint64_t master_seed, std::uint64_t replica_id)
    : alpha_(initial.alpha()),
      dimension_(initial.dimension()),
      positions_(initial.coordinates().begin(), initial.coordinates().end()),
      master_seed_(master_seed),
      replica_id_(replica_id),
      rng_(master_seed, replica_id) {}

void ParticleEnsemble::advance(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("evolve needs dt > 0");
  const double scale = std::sqrt(alpha_ * dt);
  for (double& x : positions_) x += scale * rng_.normal();
  time_ += dt;
}

std::size_t ParticleEnsemble::count_in(const Rectangle& a) const {
  if (a.dimension() != dimension_) throw ParameterError("count: dimension mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i)
    if (a.contains(particle(i))) ++n;
  return n;
}

ParticleEnsemble init_ensemble(const AtomicMeasure& initial, std::uint64_t master_seed, std::uint64_t replica_id) {
  return {initial, master_seed, replica_id};
}

ParticleEnsemble evolve(ParticleEnsemble ensemble, double dt) {
  ensemble.advance(dt);
  return ensemble;
}

std::vector<double> uniform_grid(double horizon, std::size_t steps) {
  if (!(horizon > 0.0)) throw ParameterError("time horizon must be > 0");
  if (steps == 0) throw ParameterError("grid needs at least one step");
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) grid[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
  return grid;
}

PathRecord sample_path(const AtomicMeasure& initial, std::span<const double> time_grid,
                       std::span<const TestFunction> functions, std::uint64_t master_seed, std::uint64_t replica_id,
                       bool keep_snapshots) {
  if (time_grid.empty() || time_grid.front() != 0.0) throw ParameterError("time grid must start at 0");
  for (std::size_t i = 1; i < time_grid.size(); ++i)
    if (!(time_grid[i] > time_grid[i - 1])) throw ParameterError("time grid must be strictly increasing");
  for (const auto& f : functions)
    if (f.dimension() != initial.dimension()) throw ParameterError("test function dimension mismatch");

  PathRecord record;
  record.replica_id = replica_id;
  record.time_grid.assign(time_grid.begin(), time_grid.end());
  record.traces.resize(functions.size());
  for (auto& tr : record.traces) {
    tr.pair.reserve(time_grid.size());
    tr.pair_laplacian.reserve(time_grid.size());
    tr.pair_gradient_norm2.reserve(time_grid.size());
  }
  if (keep_snapshots) record.snapshots.reserve(time_grid.size());

  ParticleEnsemble ensemble(initial, master_seed, replica_id);
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    if (i > 0) ensemble.advance(time_grid[i] - time_grid[i - 1]);
    if (keep_snapshots) record.snapshots.push_back(ensemble.measure());
    for (std::size_t j = 0; j < functions.size(); ++j) {
      const auto& f = functions[j];
      double lap = 0.0, grad2 = 0.0;
      for (std::size_t p = 0; p < ensemble.size(); ++p) {
        const auto x = ensemble.particle(p);
        lap += f.laplacian(x);
        grad2 += f.gradient_norm2(x);
      }
      auto& tr = record.traces[j];
      tr.pair.push_back(ensemble.pair(f));
      tr.pair_laplacian.push_back(lap / ensemble.alpha());
      tr.pair_gradient_norm2.push_back(grad2 / ensemble.alpha());
    }
  }
  return record;
}

void write_path_csv(std::ostream& out, std::span<const PathRecord> records) {
  out << "replica_id,t,phi_id,pair,pair_lap,pair_gradsq\n";
  for (const auto& r : records)
    for (std::size_t j = 0; j < r.traces.size(); ++j)
      for (std::size_t i = 0; i < r.time_grid.size(); ++i)
        out << r.replica_id << ',' << format_real(r.time_grid[i]) << ',' << j << ','
            << format_real(r.traces[j].pair[i]) << ',' << format_real(r.traces[j].pair_laplacian[i]) << ','
            << format_real(r.traces[j].pair_gradient_norm2[i]) << '\n';
}

double trapezoid(std::span<const double> grid, std::span<const double> values) {
  if (grid.size() != values.size()) throw ParameterError("trapezoid: grid and values differ in length");
  double sum = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) sum += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
  return sum;
}

}  // namespace dklab
