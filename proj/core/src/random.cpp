#include "rodtrap/random.hpp"

namespace rodtrap {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t counter) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = root;
  std::uint64_t out = splitmix64(s);
  s ^= h;
  out ^= splitmix64(s);
  s ^= counter * 0xd6e8feb86659fd93ULL;
  out ^= splitmix64(s);
  return out;
}

Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t counter) {
  return Rng(derive_seed(root, stream, counter));
}

}  // namespace rodtrap
