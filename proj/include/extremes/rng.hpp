#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace extremes {

/// Engine used for every stochastic component. All draws go through the
/// <random> distributions on top of it, so a given seed reproduces the same
/// stream on the same standard library.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// FNV-1a of a label, used to give each component its own stream family.
std::uint64_t label_hash(std::string_view label) noexcept;

/// Seed for sub-stream `index` of the family `label` under `seed`. Streams for
/// distinct (label, index) pairs are decorrelated by splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index = 0) noexcept;

Rng make_stream(std::uint64_t seed, std::string_view label,
                std::uint64_t index = 0);

/// Uniform on the open interval (0, 1).
double uniform_open(Rng& rng);

} // namespace extremes
