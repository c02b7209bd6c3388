#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace smk {

// Seed derivation for independent substreams.
//
// Every stochastic task (a replication, a study cell, the auxiliary test
// randomisation) owns a private engine seeded by
//
//   seed = mix(mix(master ^ fnv1a(tag)) + index)
//
// where mix is the SplitMix64 finaliser and fnv1a the 64-bit FNV-1a hash of
// the tag string. Results therefore do not depend on execution order.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view text);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0);

class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::string_view tag, std::uint64_t index = 0)
      : engine_(derive_seed(master, tag, index)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  // Uniform on (0, 1); used where log(u) or quantile(u) must be finite.
  double open_uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  // Uniform integer on {lo, ..., hi}.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  double normal() { return std::normal_distribution<double>{}(engine_); }
  double gamma(double shape) {
    return std::gamma_distribution<double>{shape, 1.0}(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

  // UniformRandomBitGenerator interface.
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace smk
