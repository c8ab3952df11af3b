#include "cuspmdn/rng.hpp"

namespace cuspmdn {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return splitmix64(splitmix64(seed) ^ (tag * 0xd1b54a32d192ed03ULL));
}

Engine row_stream(std::uint64_t seed, std::uint64_t index) {
  return Engine(derive_seed(splitmix64(seed ^ 0x5851f42d4c957f2dULL), index));
}

}  // namespace cuspmdn
