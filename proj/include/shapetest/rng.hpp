#pragma once

#include <cstdint>
#include <random>

namespace shapetest {

using RngSeed = std::uint64_t;

// 64-bit Mersenne Twister; every call site derives its own stream so that
// parallel trials never share generator state.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic child seed for stream `stream` of `seed`.
RngSeed derive_seed(RngSeed seed, std::uint64_t stream);

Rng make_rng(RngSeed seed, std::uint64_t stream = 0);

}  // namespace shapetest
