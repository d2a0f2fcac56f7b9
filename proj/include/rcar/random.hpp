#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace rcar {

/// Counter-based generator: output n is a keyed bijective mix of n, so a
/// stream is fully described by (key, counter) and streams with distinct keys
/// never share state. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return mix64(key_ + kGamma * ++counter_); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Hash a root seed and a path of labels (purpose, individual, replication,
/// ...) into a stream key. Distinct paths give unrelated keys.
std::uint64_t derive_key(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path);

inline CounterRng make_stream(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> path) {
  return CounterRng(derive_key(seed, path));
}

/// Stream labels, so that e.g. changing T never changes coefficient draws.
enum class StreamPurpose : std::uint64_t {
  coefficients = 1,
  innovations = 2,
  replication = 3,
  expectation_sampling = 4,
};

/// Gaussian draws on top of one CounterRng.
class NormalStream {
 public:
  explicit NormalStream(CounterRng rng) : rng_(rng) {}
  double operator()() { return dist_(rng_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  CounterRng& engine() noexcept { return rng_; }

 private:
  CounterRng rng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace rcar
