#include "clipfl/schedule.hpp"

#include "clipfl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace clipfl {

StepSchedule::StepSchedule(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw UsageError("stepsize schedule is empty");
  for (double v : values_) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw UsageError("stepsizes must be positive and finite, got " + std::to_string(v));
    }
  }
}

LocalSchedule LocalSchedule::uniform(std::size_t gap) {
  if (gap == 0) throw UsageError("local step gap must be at least 1");
  return LocalSchedule(std::vector<std::size_t>{gap});
}

LocalSchedule LocalSchedule::from_sync_times(const std::vector<std::size_t>& times) {
  if (times.size() < 2 || times.front() != 0) {
    throw UsageError("synchronization times must start at 0 and contain at least two entries");
  }
  std::vector<std::size_t> gaps;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) throw UsageError("synchronization times must strictly increase");
    gaps.push_back(times[i] - times[i - 1]);
  }
  return LocalSchedule(std::move(gaps));
}

std::size_t LocalSchedule::max_gap() const noexcept {
  return *std::max_element(gaps_.begin(), gaps_.end());
}

std::string to_string(ShuffleMode mode) {
  switch (mode) {
    case ShuffleMode::kReshuffle: return "reshuffle";
    case ShuffleMode::kShuffleOnce: return "shuffle_once";
    case ShuffleMode::kIncremental: return "incremental";
  }
  return "unknown";
}

ShuffleMode shuffle_mode_from_string(const std::string& name) {
  if (name == "reshuffle") return ShuffleMode::kReshuffle;
  if (name == "shuffle_once") return ShuffleMode::kShuffleOnce;
  if (name == "incremental") return ShuffleMode::kIncremental;
  throw UsageError("unknown shuffle mode '" + name +
                   "' (expected reshuffle, shuffle_once or incremental)");
}

CohortSchedule CohortSchedule::make(std::size_t clients, std::size_t cohort_size, CounterRng& rng) {
  if (cohort_size == 0 || cohort_size > clients || clients % cohort_size != 0) {
    throw ConfigError("cohort_size", "cohort size " + std::to_string(cohort_size) +
                                         " must divide the client count " + std::to_string(clients));
  }
  CohortSchedule s;
  s.cohort_size = cohort_size;
  s.rounds = clients / cohort_size;
  s.client_perm = random_permutation(clients, rng);
  s.cohorts.reserve(s.rounds);
  for (std::size_t r = 0; r < s.rounds; ++r) {
    const auto begin = s.client_perm.begin() + static_cast<std::ptrdiff_t>(r * cohort_size);
    s.cohorts.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(cohort_size));
  }
  return s;
}

}  // namespace clipfl
