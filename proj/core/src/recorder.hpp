#pragma once

#include "clipfl/problem.hpp"
#include "clipfl/run_record.hpp"

#include <chrono>
#include <string>

namespace clipfl::detail {

/// Per-epoch metric logging and divergence control shared by all runners.
class Recorder {
 public:
  Recorder(const Problem& p, std::string algorithm, nlohmann::json config, const ParamVector& x0,
           const RunOptions& options);

  /// Logs the iterate reached after `epoch` epochs. Returns false when the run
  /// must stop (the row is kept if x is finite).
  bool record(std::size_t epoch, const ParamVector& x, double stepsize);

  /// Stops the run without a row, e.g. when the pseudogradient overflowed.
  void abort() { status_ = RunStatus::kDiverged; }

  bool stopped() const noexcept { return status_ == RunStatus::kDiverged; }

  RunRecord finish();

  OracleCounters counters;
  std::uint64_t comm_rounds = 0;

 private:
  const Problem& p_;
  const RunOptions& options_;
  RunRecord record_;
  RunStatus status_ = RunStatus::kFinished;
  ParamVector grad_, client_, scratch_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace clipfl::detail
