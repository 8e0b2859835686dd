#pragma once

#include <cstdint>
#include <random>

namespace uaweight {

// mt19937_64 output is fixed by the standard; the distribution helpers below
// replace std::*_distribution, whose algorithms differ between standard
// libraries, so seeded runs agree across toolchains.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n). n must be positive.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Standard normal draw (Box-Muller, one value per call).
double standard_normal(Rng& rng);

bool bernoulli(Rng& rng, double p);

/// Derives an independent stream seed from a base seed and an ordinal
/// (splitmix64 finalizer over base ^ ordinal).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t ordinal);

}  // namespace uaweight
