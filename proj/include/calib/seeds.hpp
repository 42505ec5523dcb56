#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace calib {

// Replication seed layout: stream tag (8 bits) | block (40 bits) | index (16 bits).
// Distinct (stream, block, index) triples never collide, so real and simulated
// seeds stay disjoint by construction. Real block 0 is exactly [0, N).
enum class SeedStream : std::uint8_t { real = 0, evaluation = 1, grid = 2, scratch = 3 };

inline constexpr std::uint64_t kMaxSeedBlock = (std::uint64_t{1} << 40) - 1;
inline constexpr std::uint64_t kMaxSeedIndex = (std::uint64_t{1} << 16) - 1;

inline std::uint64_t replication_seed(SeedStream stream, std::uint64_t block, std::uint64_t index) {
  if (block > kMaxSeedBlock || index > kMaxSeedIndex) {
    throw std::out_of_range("seed block or index exceeds the seed layout");
  }
  return (std::uint64_t(stream) << 56) | (block << 16) | index;
}

// Block used by evaluation `eval_index` of the optimization run seeded with
// `run_seed`. Strategies sharing a run seed share blocks index by index.
inline std::uint64_t evaluation_block(std::uint64_t run_seed, std::uint64_t eval_index) {
  if (run_seed >= (std::uint64_t{1} << 20) || eval_index >= (std::uint64_t{1} << 20)) {
    throw std::out_of_range("run seed or evaluation index too large");
  }
  return (run_seed << 20) | eval_index;
}

// Independent generator for one purpose of one run.
enum class RngPurpose : std::uint32_t {
  initial_design = 1,
  random_search = 2,
  bo = 3,
  turbo = 4,
  gp_fit = 5,
};

inline std::mt19937_64 make_rng(std::uint64_t seed, RngPurpose purpose, std::uint64_t salt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(salt),
                    static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace calib
