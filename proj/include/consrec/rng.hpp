#pragma once

#include <cstdint>
#include <random>

namespace consrec {

using Rng = std::mt19937_64;

// Each consumer of randomness owns an independent stream derived from the
// master seed, so adding draws to one purpose never shifts another.
enum class RngPurpose : std::uint32_t {
  split = 1,
  train_negatives = 2,
  eval_negatives = 3,
  init = 4,
  synthetic = 5,
};

inline Rng make_stream(std::uint64_t master_seed, RngPurpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(purpose), 0x636f6e73u};
  return Rng(seq);
}

}  // namespace consrec
