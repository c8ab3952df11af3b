#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cuspmdn {

/// Every random draw in the library comes from this engine.
using Engine = std::mt19937_64;

/// Name recorded in dataset metadata so a file can be regenerated exactly.
inline constexpr std::string_view kRngName = "mt19937_64/splitmix64-streams";

/// One round of the SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Sub-seed for a named purpose (`tag`) under a root seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// Independent engine for row `index` of a generator seeded with `seed`.
/// Rows never share state, so results do not depend on evaluation order.
Engine row_stream(std::uint64_t seed, std::uint64_t index);

/// Well-known tags used with derive_seed.
namespace seed_tag {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kSplit = 2;
inline constexpr std::uint64_t kTrain = 3;
inline constexpr std::uint64_t kInit = 11;
inline constexpr std::uint64_t kShuffle = 12;
inline constexpr std::uint64_t kDropout = 13;
}  // namespace seed_tag

}  // namespace cuspmdn
