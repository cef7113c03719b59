#include "extremes/rng.hpp"

namespace extremes {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + UINT64_C(0x9E3779B97F4A7C15);
  z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
  z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
  return z ^ (z >> 31);
}

std::uint64_t label_hash(std::string_view label) noexcept {
  std::uint64_t h = UINT64_C(0xcbf29ce484222325);
  for (unsigned char c : label) {
    h ^= c;
    h *= UINT64_C(0x100000001b3);
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index) noexcept {
  std::uint64_t s = splitmix64(seed ^ label_hash(label));
  return splitmix64(s + splitmix64(index));
}

Rng make_stream(std::uint64_t seed, std::string_view label,
                std::uint64_t index) {
  std::uint64_t s = derive_seed(seed, label, index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

double uniform_open(Rng& rng) {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace extremes
