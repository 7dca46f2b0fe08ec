#pragma once

// Named random streams derived from a single root seed.

#include <cstdint>
#include <random>
#include <string_view>

namespace scarlab {

std::uint64_t fnv1a64(std::string_view bytes);

// Deterministic child seed for (root, stream name, index); independent of scheduling.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

inline std::mt19937_64 make_stream(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(root, stream, index));
}

}  // namespace scarlab
