#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace nusavocab {

__extension__ typedef unsigned __int128 uint128;

/// Stateless counter-based randomness.
///
/// Every random decision in the toolkit is a pure function of a 64-bit key and
/// a counter, so results never depend on call order, thread scheduling, or the
/// standard library's distribution implementations. Keys for sub-streams are
/// derived with derive_key(parent, index).
namespace rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t index) noexcept {
  return mix64(mix64(key + kGolden) ^ (index * kGolden + 0x632be59bd9b4e019ULL));
}

// FNV-1a folded through mix64; used to key streams by string ids.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

constexpr std::uint64_t at(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key ^ mix64(counter * kGolden + kGolden));
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by multiply-shift. n must be > 0.
constexpr std::uint64_t to_below(std::uint64_t x, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<uint128>(x) * n) >> 64);
}

}  // namespace rng

/// Sequential view over rng::at(key, 0), rng::at(key, 1), ...
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t next() noexcept { return rng::at(key_, counter_++); }
  constexpr double uniform() noexcept { return rng::to_unit(next()); }
  constexpr std::uint64_t below(std::uint64_t n) noexcept { return rng::to_below(next(), n); }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nusavocab
