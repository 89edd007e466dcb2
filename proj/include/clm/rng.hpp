#pragma once

#include <cstdint>
#include <random>

namespace clm {

using Engine = std::mt19937_64;

/// Independent, reproducible stream for ensemble member `stream` of a run
/// seeded with `master_seed`. The result does not depend on scheduling.
inline Engine make_stream(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x636c6d21u};
  return Engine(seq);
}

}  // namespace clm
