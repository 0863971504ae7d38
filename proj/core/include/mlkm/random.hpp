#pragma once

#include <cstdint>
#include <random>

namespace mlkm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer applied to (seed, stream); gives statistically
/// independent sub-seeds for folds, rotations, replications and splits.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace mlkm
