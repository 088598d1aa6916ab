#include "dklab/rng.hpp"

namespace dklab {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::uint64_t replica_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(replica_id), static_cast<std::uint32_t>(replica_id >> 32),
                    0x6b4c6162u};
  return std::mt19937_64(seq);
}

}  // namespace

ReplicaRng::ReplicaRng(std::uint64_t master_seed, std::uint64_t replica_id)
    : engine_(seeded_engine(master_seed, replica_id)) {}

std::uint64_t ReplicaRng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

}  // namespace dklab
