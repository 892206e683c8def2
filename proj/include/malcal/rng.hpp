#pragma once

#include <cstdint>
#include <random>

namespace malcal {

/// Engine used for every random stream in the library.
using Rng = std::mt19937_64;

/// Returns the engine for stream `index` within `domain` under `master_seed`.
///
/// The engine is seeded through std::seed_seq from the six 32-bit halves of
/// (master_seed, domain, index). Monte Carlo loops give every path its own
/// stream (index = path number), so results do not depend on how paths are
/// distributed over worker threads.
Rng make_stream(std::uint64_t master_seed, std::uint64_t domain, std::uint64_t index);

/// Standard normal draw (ziggurat).
double standard_normal(Rng& rng);

/// Uniform draw on [0, 1).
double uniform01(Rng& rng);

}  // namespace malcal
