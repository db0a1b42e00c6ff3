#pragma once

#include "clipfl/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace clipfl {

/// Oracle calls made by the algorithm itself. Metric evaluation for the
/// record (f and ||grad f|| per epoch) is not counted.
struct OracleCounters {
  std::uint64_t component_grads = 0;
  std::uint64_t client_grads = 0;
  std::uint64_t full_grads = 0;

  friend bool operator==(const OracleCounters&, const OracleCounters&) = default;
};

struct EpochRow {
  std::size_t epoch = 0;
  double f_residual = 0.0;
  double grad_norm = 0.0;
  double stepsize = 0.0;  ///< server/outer stepsize used to reach this epoch; 0 for epoch 0
  std::uint64_t comm_rounds = 0;
  OracleCounters counters;

  friend bool operator==(const EpochRow&, const EpochRow&) = default;
};

enum class RunStatus { kFinished, kDiverged };
std::string to_string(RunStatus status);

struct RunRecord {
  std::string algorithm;
  nlohmann::json config;  ///< snapshot of the algorithm parameters
  Seed seed = 0;
  double f_star = 0.0;
  std::vector<EpochRow> rows;  ///< contiguous from epoch 0; absent after a divergence abort
  RunStatus status = RunStatus::kFinished;
  ParamVector final_x;                  ///< last finite iterate
  std::vector<ParamVector> trajectory;  ///< per-epoch iterates when requested
  double wall_seconds = 0.0;

  bool diverged() const noexcept { return status == RunStatus::kDiverged; }
  std::size_t epochs_completed() const noexcept { return rows.empty() ? 0 : rows.back().epoch; }
};

/// Hooks into the inner workings of a runner. Every hook sees values that the
/// runner actually applied; default implementations ignore them.
class RunObserver {
 public:
  virtual ~RunObserver() = default;

  /// One local step: the client subtracted its stepsize times `direction`
  /// (a batch-mean gradient).
  virtual void on_inner_step(std::size_t epoch, std::size_t round, std::size_t client,
                             const ParamVector& direction) {
    (void)epoch, (void)round, (void)client, (void)direction;
  }

  /// A client finished its local work for this round.
  virtual void on_client_update(std::size_t epoch, std::size_t round, std::size_t client,
                                const ParamVector& start, const ParamVector& end, double stepsize,
                                std::size_t steps) {
    (void)epoch, (void)round, (void)client, (void)start, (void)end, (void)stepsize, (void)steps;
  }

  /// Participating clients of a communication round.
  virtual void on_cohort(std::size_t epoch, std::size_t round,
                         std::span<const std::size_t> clients) {
    (void)epoch, (void)round, (void)clients;
  }

  /// The epoch's pseudogradient before the clipped server step.
  virtual void on_pseudogradient(std::size_t epoch, const ParamVector& g) {
    (void)epoch, (void)g;
  }
};

struct RunOptions {
  std::size_t epochs = 1;
  Seed seed = 0;
  double f_star = 0.0;
  /// A run aborts once f(x) - f* exceeds this or any coordinate is non-finite.
  double divergence_threshold = 1e12;
  bool keep_trajectory = false;
  RunObserver* observer = nullptr;
};

}  // namespace clipfl
