#pragma once

#include <cstdint>
#include <vector>

namespace cptych {

/// Counter-based 64-bit generator. Output i of stream s under seed k is
///
///   key    = mix64(k ^ mix64(s + 0x632BE59BD9B4E019))
///   out(i) = mix64(key + 0x9E3779B97F4A7C15 * (i + 1))
///
/// where mix64 is the SplitMix64 finalizer. The full algorithm, including
/// the derived uniform/normal/Poisson samplers, is fixed in docs/formats.md so
/// that datasets can be regenerated bit-exactly from any language.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 bits.
  double uniform() noexcept;
  /// Uniform in (0, 1].
  double uniform_open0() noexcept { return 1.0 - uniform(); }
  /// Standard normal, Box-Muller; two uniforms per call, no caching.
  double normal() noexcept;
  /// Poisson(mean). Knuth product method for mean < 10, PTRS otherwise.
  std::uint64_t poisson(double mean) noexcept;
  /// Uniform integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix64(std::uint64_t z) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates permutation of 0..n-1 drawn from `rng`.
std::vector<std::size_t> shuffled_indices(std::size_t n, CounterRng& rng);

}  // namespace cptych
