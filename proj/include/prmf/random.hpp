#pragma once

#include <cstdint>
#include <random>

namespace prmf {

using Rng = std::mt19937_64;

// Independent stream for (seed, stream, index); used so that e.g. epoch e's
// shuffle depends only on (seed, e).
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                    std::uint32_t(index), std::uint32_t(index >> 32)};
  return Rng(seq);
}

// Stream tags.
inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kInitStream = 2;
inline constexpr std::uint64_t kEpochStream = 3;

}  // namespace prmf
