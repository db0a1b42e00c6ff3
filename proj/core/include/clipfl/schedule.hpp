#pragma once

#include "clipfl/rng.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace clipfl {

/// Per-epoch positive stepsizes. The last value repeats past the end of the list.
class StepSchedule {
 public:
  StepSchedule() : values_{1.0} {}
  /// Throws UsageError unless every value is finite and positive.
  explicit StepSchedule(std::vector<double> values);
  static StepSchedule constant(double value) { return StepSchedule({value}); }

  double at(std::size_t epoch) const noexcept {
    return values_[epoch < values_.size() ? epoch : values_.size() - 1];
  }
  const std::vector<double>& values() const noexcept { return values_; }
  bool is_constant() const noexcept { return values_.size() == 1; }

 private:
  std::vector<double> values_;
};

/// Synchronization schedule 0 = t_0 < t_1 < ... for local-step methods.
/// The gap t_{p+1} - t_p is the number of local gradient steps clients take
/// in epoch p; the last gap repeats past the end of the list.
class LocalSchedule {
 public:
  LocalSchedule() : gaps_{1} {}
  static LocalSchedule uniform(std::size_t gap);
  /// Throws UsageError unless times start at 0 and strictly increase.
  static LocalSchedule from_sync_times(const std::vector<std::size_t>& times);

  std::size_t steps(std::size_t epoch) const noexcept {
    return gaps_[epoch < gaps_.size() ? epoch : gaps_.size() - 1];
  }
  /// H, the largest gap.
  std::size_t max_gap() const noexcept;
  const std::vector<std::size_t>& gaps() const noexcept { return gaps_; }

 private:
  explicit LocalSchedule(std::vector<std::size_t> gaps) : gaps_(std::move(gaps)) {}
  std::vector<std::size_t> gaps_;
};

/// Sampling-without-replacement order of a local pass.
enum class ShuffleMode {
  kReshuffle,    ///< fresh permutation every epoch (RR)
  kShuffleOnce,  ///< one permutation drawn before training (SO)
  kIncremental,  ///< identity order (IG)
};

std::string to_string(ShuffleMode mode);
ShuffleMode shuffle_mode_from_string(const std::string& name);

/// Partition of M clients into R = M / C cohorts for one meta-epoch: the client
/// indices are shuffled once and cut into contiguous windows of size C.
struct CohortSchedule {
  std::size_t cohort_size = 0;
  std::size_t rounds = 0;
  std::vector<std::size_t> client_perm;
  /// Cohort members in window order.
  std::vector<std::vector<std::size_t>> cohorts;

  /// Throws ConfigError when C is zero or does not divide M.
  static CohortSchedule make(std::size_t clients, std::size_t cohort_size, CounterRng& rng);
};

}  // namespace clipfl
