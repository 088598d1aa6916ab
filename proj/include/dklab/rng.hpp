#pragma once

#include <cstdint>
#include <random>

namespace dklab {

/// Random stream of one Monte Carlo replica.
///
/// The stream is a pure function of (master_seed, replica_id): replicas can be
/// simulated in any order, on any thread, with identical results.
class ReplicaRng {
 public:
  ReplicaRng(std::uint64_t master_seed, std::uint64_t replica_id);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace dklab

namespace dklab {

/// Independent master seed for a named sub-experiment (SplitMix64 finaliser).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace dklab
