#pragma once

#include "clipfl/problem.hpp"
#include "clipfl/run_record.hpp"
#include "clipfl/schedule.hpp"
#include "clipfl/stepsize.hpp"

#include <nlohmann/json.hpp>

namespace clipfl {

/// Clip-LocalGDJ: clients take full local gradient steps between
/// synchronizations, the server jumps along the averaged pseudogradient with a
/// smoothed-clipping stepsize.
struct ClipLocalGdjParams {
  LocalSchedule schedule;
  StepSchedule inner_stepsize;
  ClipPolicy policy;
};

/// CLERR: one random-reshuffling pass per client and epoch, clipped once.
struct ClerrParams {
  StepSchedule inner_stepsize;
  ClipPolicy policy;
  ShuffleMode shuffle = ShuffleMode::kReshuffle;
  /// Off: one permutation shared by all clients per epoch.
  bool per_client_permutation = false;
};

/// Clipped RR-CLI: reshuffled cohorts of size C, one RR pass per participating
/// client, a server step per round and a clipped global step per meta-epoch.
struct ClippedRrCliParams {
  StepSchedule client_stepsize;
  StepSchedule server_stepsize;
  ClipPolicy policy;
  std::size_t cohort_size = 1;
  /// Consecutive shuffled components averaged per local step; the last batch
  /// of a pass may be smaller.
  std::size_t batch_size = 1;
};

// All runners return a record with options.epochs + 1 rows unless the run
// diverged. Epoch 0 is the starting point.

RunRecord run_clip_local_gdj(const Problem& p, const ClipLocalGdjParams& params,
                             const ParamVector& x0, const RunOptions& options);

RunRecord run_clerr(const Problem& p, const ClerrParams& params, const ParamVector& x0,
                    const RunOptions& options);

/// Throws ConfigError when the cohort size does not divide M.
RunRecord run_clipped_rr_cli(const Problem& p, const ClippedRrCliParams& params,
                             const ParamVector& x0, const RunOptions& options);

nlohmann::json to_json(const ClipPolicy& policy);
nlohmann::json to_json(const StepSchedule& schedule);
nlohmann::json to_json(const ClipLocalGdjParams& params);
nlohmann::json to_json(const ClerrParams& params);
nlohmann::json to_json(const ClippedRrCliParams& params);

}  // namespace clipfl
