#include "causalbandit/rng.hpp"

namespace causalbandit {

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t key = mix(seed ^ 0x6a09e667f3bcc909ULL);
  std::uint64_t salt = 0xbb67ae8584caa73bULL;
  for (auto id : ids) {
    key = mix(key ^ mix(id + salt));
    salt += 0x9e3779b97f4a7c15ULL;
  }
  return Rng(Keyed{}, key);
}

Rng Rng::split(std::uint64_t id) const { return Rng(Keyed{}, mix(key_ ^ mix(id + 0x3c6ef372fe94f82bULL))); }

std::uint64_t Rng::uniform_below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace causalbandit
