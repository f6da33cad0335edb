#pragma once

#include <cstdint>
#include <limits>

namespace aclock {

/// Counter-based random stream.
///
/// Every draw is a keyed hash of a 64-bit counter, so a stream is fully
/// determined by its key and position. Independent sub-streams are derived
/// from (master seed, stream index) or split off an existing stream, which
/// makes parallel Monte Carlo reproducible regardless of scheduling.
///
/// Satisfies UniformRandomBitGenerator, but normal() and uniform() are
/// implemented here so that results do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller, pairs cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Child stream keyed by this stream's key and `index`. Does not advance
  /// this stream.
  [[nodiscard]] Rng split(std::uint64_t index) const;

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

} // namespace aclock
