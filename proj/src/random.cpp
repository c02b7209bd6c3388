#include "smk/random.hpp"

namespace smk {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a(tag)) + index);
}

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
  // Rejection on the top bits keeps the draw exactly uniform.
  const std::uint64_t span = hi - lo;
  if (span == ~std::uint64_t{0}) return engine_();
  const std::uint64_t range = span + 1;
  // 2^64 mod range, so that [0, max_ok] holds a whole number of ranges.
  const std::uint64_t rem = ((~std::uint64_t{0} % range) + 1) % range;
  const std::uint64_t max_ok = ~std::uint64_t{0} - rem;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw > max_ok);
  return lo + draw % range;
}

}  // namespace smk
