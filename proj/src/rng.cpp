#include "lcm/rng.hpp"

namespace lcm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys) {
    h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  }
  return h;
}

std::size_t Rng::below(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

}  // namespace lcm
