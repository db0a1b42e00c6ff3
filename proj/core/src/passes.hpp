#pragma once

#include "clipfl/problem.hpp"
#include "clipfl/rng.hpp"
#include "clipfl/run_record.hpp"
#include "clipfl/schedule.hpp"

#include <span>
#include <vector>

namespace clipfl::detail {

/// Data order of one pass. `lane` is 0 for a permutation shared by all
/// clients and m + 1 for client m's own permutation.
std::vector<std::size_t> data_permutation(Seed seed, ShuffleMode mode, std::size_t epoch,
                                          std::size_t n, std::size_t lane);

/// Working vectors for local passes, all sized dim().
struct Workspace {
  explicit Workspace(std::size_t dim);
  ParamVector y, dir, acc, g, scratch, comp;
};

struct PassContext {
  std::size_t epoch = 0;
  std::size_t round = 0;
  std::size_t client = 0;
  RunObserver* observer = nullptr;
};

/// One sequential pass of client `m` over `order` in batches of `batch`
/// consecutive components, starting from `w.y`. Leaves the end point in
/// `w.y` and the mean applied direction in `w.acc`. Returns the step count.
std::size_t rr_pass(const Problem& p, std::size_t m, std::span<const std::size_t> order,
                    std::size_t batch, double alpha, Workspace& w, OracleCounters& counters,
                    const PassContext& ctx);

/// K full local gradient steps of client `m` from `w.y`; same outputs as rr_pass.
void local_gd_pass(const Problem& p, std::size_t m, std::size_t steps, double alpha, Workspace& w,
                   OracleCounters& counters, const PassContext& ctx);

}  // namespace clipfl::detail
