#pragma once

#include "clipfl/problem.hpp"
#include "clipfl/run_record.hpp"
#include "clipfl/schedule.hpp"
#include "clipfl/stepsize.hpp"

#include <limits>
#include <nlohmann/json.hpp>
#include <string>

namespace clipfl {

enum class BaselineKind {
  kSO,          ///< shuffled SGD over all M*N components
  kCSO,         ///< SO with every stochastic gradient clipped to norm <= clip_level
  kNastya,      ///< per-client RR pass, unclipped outer jump with server_stepsize
  kLocalGD,     ///< local steps, plain averaging
  kCELGC,       ///< local steps with smoothed clipping per step, plain averaging
  kCEFedAvg,    ///< clipped client steps, server stepsize on the averaged update
  kCEFedAvgPP,  ///< CE-FedAvg with a uniformly random cohort per round
  kGD,          ///< (clipped) gradient descent on f with stepsize from `policy`
};

std::string to_string(BaselineKind kind);
/// Throws UsageError for an unknown name.
BaselineKind baseline_kind_from_string(const std::string& name);

/// Fields unused by a kind are ignored.
struct BaselineParams {
  /// Client / SGD stepsize; Nastya's inner stepsize.
  StepSchedule stepsize;
  /// Nastya's outer stepsize and the FedAvg server stepsize.
  StepSchedule server_stepsize;
  /// CSO and CE-FedAvg(-PP) clip level.
  double clip_level = std::numeric_limits<double>::infinity();
  /// CELGC local steps and GD.
  ClipPolicy policy;
  /// Data order for SO, CSO and Nastya.
  ShuffleMode shuffle = ShuffleMode::kShuffleOnce;
  bool per_client_permutation = false;
  /// Local steps per communication round for the local-step family.
  std::size_t local_steps = 1;
  /// Components per local step, sampled with replacement; 0 uses the full
  /// local gradient.
  std::size_t batch_size = 0;
  /// CE-FedAvg-PP cohort size; one epoch is M / C rounds.
  std::size_t cohort_size = 1;
};

/// Epoch conventions: SO/CSO/Nastya one data pass, local-step methods one
/// communication round, CE-FedAvg-PP M/C rounds, GD one step.
RunRecord run_baseline(BaselineKind kind, const Problem& p, const BaselineParams& params,
                       const ParamVector& x0, const RunOptions& options);

nlohmann::json to_json(BaselineKind kind, const BaselineParams& params);

}  // namespace clipfl
