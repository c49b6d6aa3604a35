#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace isodiff {

// Deterministic random stream. Distributions are hand-rolled on top of
// mt19937_64 because the std distribution objects are not bit-reproducible
// across standard library implementations.
//
// All randomness in the artifact flows from a single master seed through
// named streams: stream = RngStream::named(seed, "purpose"). Two streams
// with distinct labels never interact, so adding a consumer of one stream
// cannot perturb draws on another.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t derive(std::uint64_t master_seed, std::string_view label);
  static RngStream named(std::uint64_t master_seed, std::string_view label) {
    return RngStream(derive(master_seed, label));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal();

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // +1 or -1 with equal probability.
  double rademacher() { return (next_u64() & 1u) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace isodiff
