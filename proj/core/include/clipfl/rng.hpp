#pragma once

#include "clipfl/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace clipfl {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Named random streams. Values are part of the reproducibility contract:
/// changing one changes every trajectory that uses it.
enum class StreamTag : std::uint64_t {
  kShifts = 1,
  kCenters = 2,
  kDataPermutation = 3,
  kClientPermutation = 4,
  kBatchSampling = 5,
  kCohortSampling = 6,
  kProbes = 7,
  kSyntheticData = 8,
};

/// Counter-based generator: the i-th output of a stream is a pure function of
/// (key, i), so streams derived for different clients or epochs never depend
/// on the order in which they are consumed.
///
/// Satisfies UniformRandomBitGenerator. Distributions are implemented here
/// rather than taken from <random> because the standard distributions are not
/// required to produce identical sequences across library implementations.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  /// Derives an independent stream from a root seed and a path of integers.
  static CounterRng derive(Seed seed, StreamTag tag, std::initializer_list<std::uint64_t> path = {});

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Unbiased (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Standard normal via Box-Muller; consumes two words per call.
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates shuffle driven by `rng`.
void shuffle(std::span<std::size_t> items, CounterRng& rng);

/// Uniformly random permutation of {0, ..., n-1}.
std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng);

/// The identity permutation of size n.
std::vector<std::size_t> identity_permutation(std::size_t n);

/// True when `order` is a bijection on {0, ..., order.size()-1}.
bool is_permutation(std::span<const std::size_t> order);

}  // namespace clipfl
