#pragma once

// Seeded randomness. Draws avoid std::uniform_int_distribution, whose output
// differs between standard library implementations, so seeded runs produce
// identical files on every platform.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace contraforge {

using Rng = std::mt19937_64;

// FNV-1a, 64-bit.
std::uint64_t hash_string(std::string_view s);

// splitmix64 finalizer over the combined pair.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

inline std::uint64_t mix_seed(std::uint64_t a, std::string_view stream) {
  return mix_seed(a, hash_string(stream));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace contraforge
