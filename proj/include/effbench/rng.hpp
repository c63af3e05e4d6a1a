#pragma once

#include <cstdint>
#include <limits>

namespace effbench {

/// SplitMix64 run in counter mode.
///
/// The n-th output of stream (seed, stream_id) is mix(key + (n + 1) * golden),
/// where key = mix(seed) ^ mix(stream_id ^ salt). Every draw is a pure function of
/// (seed, stream_id, n), so replicate i of a bootstrap can be generated by any
/// worker and still produce the same numbers as a serial run.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal by inversion (one counter step per draw).
  double normal();
  double normal(double mean, double sd);

  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace effbench
