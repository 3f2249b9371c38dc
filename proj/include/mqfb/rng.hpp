#pragma once

#include <cstdint>
#include <random>

namespace mqfb {

// Seed stream: every consumer derives its own engine from (seed, tag), so
// results do not depend on how many draws other consumers made or on the
// order they run in.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  SeedStream split(std::uint64_t tag) const { return SeedStream(mix(seed_ ^ mix(tag + 1))); }

  std::mt19937_64 engine() const { return std::mt19937_64(mix(seed_)); }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace mqfb
