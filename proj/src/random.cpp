#include "rcar/random.hpp"

namespace rcar {

std::uint64_t derive_key(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = CounterRng::mix64(seed ^ 0x5851f42d4c957f2dULL);
  std::uint64_t depth = 0;
  for (std::uint64_t label : path) {
    ++depth;
    key = CounterRng::mix64(key ^ CounterRng::mix64(label + 0x9e3779b97f4a7c15ULL * depth));
  }
  return key;
}

}  // namespace rcar
