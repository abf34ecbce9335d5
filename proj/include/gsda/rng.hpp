#ifndef GSDA_RNG_HPP
#define GSDA_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace gsda {

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Splittable seed: every stage draws its generator from a named child so
/// adding a stage never shifts the random streams of the others.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  SeedTree child(std::string_view name) const { return SeedTree(splitmix64(seed_ ^ fnv1a(name))); }
  SeedTree child(std::uint64_t index) const { return SeedTree(splitmix64(seed_ + splitmix64(index))); }
  std::mt19937_64 engine() const { return std::mt19937_64(splitmix64(seed_)); }

 private:
  std::uint64_t seed_;
};

}  // namespace gsda

#endif  // GSDA_RNG_HPP
