#pragma once

#include <cstdint>
#include <random>

namespace porestat {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent, reproducible streams.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

// Seed for stream `index` of a run seeded with `seed`. Streams are tied to
// work-item indices, never to worker threads, so results do not depend on
// how the work is partitioned.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Stream tags.
namespace streams {
inline constexpr std::uint64_t kCountBlock = 1;
inline constexpr std::uint64_t kPilot = 2;
inline constexpr std::uint64_t kOracle = 3;
inline constexpr std::uint64_t kSpecimen = 4;
inline constexpr std::uint64_t kSelfSample = 5;
}  // namespace streams

// Number of worker threads to use for a request of `requested` (0 = all cores).
unsigned resolve_workers(unsigned requested) noexcept;

}  // namespace porestat
