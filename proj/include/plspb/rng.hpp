#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace plspb {

using Rng = std::mt19937_64;

/// Independent generator for task `stream` (and optional `substream`) of a run
/// seeded with `seed`. The same triple always yields the same sequence.
Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0);

/// Uniform integer in [0, bound) by rejection; unlike std::uniform_int_distribution
/// the mapping from engine output is fixed.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Each index runs exactly once; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace plspb
