#pragma once

#include <concepts>
#include <cstdint>
#include <random>
#include <string>

namespace ubuntuworld {

// Anything that yields uniformly distributed 64-bit words. Agents are written
// against this so tests can inject scripted sources.
template <class R>
concept RandomSource = requires(R& r) {
  { r.next_u64() } -> std::same_as<std::uint64_t>;
};

// Uniform double in [0, 1) from the top 53 bits.
template <RandomSource R>
double uniform01(R& r) {
  return static_cast<double>(r.next_u64() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection sampling keeps it exact and the
// mapping is fixed, so sequences are identical on every standard library.
template <RandomSource R>
std::uint64_t uniform_below(R& r, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = r.next_u64();
  while (x >= limit) x = r.next_u64();
  return x % n;
}

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform() { return uniform01(*this); }
  std::uint64_t below(std::uint64_t n) { return uniform_below(*this, n); }

  // Full engine state as whitespace-separated decimal words.
  std::string save() const;
  void restore(const std::string& text);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ubuntuworld
