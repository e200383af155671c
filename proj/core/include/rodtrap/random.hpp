#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rodtrap {

using Rng = std::mt19937_64;

// Seed splitting: every random stream in a run is identified by
// (root seed, stream name, counter). The name is hashed with FNV-1a and the
// three words are folded through SplitMix64, so streams are independent of
// the order in which they are created.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t counter = 0);
Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t counter = 0);

}  // namespace rodtrap
