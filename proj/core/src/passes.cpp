#include "passes.hpp"

#include <algorithm>

namespace clipfl::detail {

std::vector<std::size_t> data_permutation(Seed seed, ShuffleMode mode, std::size_t epoch,
                                          std::size_t n, std::size_t lane) {
  switch (mode) {
    case ShuffleMode::kIncremental:
      return identity_permutation(n);
    case ShuffleMode::kShuffleOnce: {
      auto rng = CounterRng::derive(seed, StreamTag::kDataPermutation, {0, lane});
      return random_permutation(n, rng);
    }
    case ShuffleMode::kReshuffle:
      break;
  }
  auto rng = CounterRng::derive(seed, StreamTag::kDataPermutation, {epoch, lane});
  return random_permutation(n, rng);
}

Workspace::Workspace(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  for (ParamVector* v : {&y, &dir, &acc, &g, &scratch, &comp}) v->setZero(d);
}

std::size_t rr_pass(const Problem& p, std::size_t m, std::span<const std::size_t> order,
                    std::size_t batch, double alpha, Workspace& w, OracleCounters& counters,
                    const PassContext& ctx) {
  const std::size_t n = order.size();
  const std::size_t b = std::max<std::size_t>(batch, 1);
  std::size_t steps = 0;
  w.acc.setZero();
  for (std::size_t start = 0; start < n; start += b) {
    const std::size_t stop = std::min(n, start + b);
    w.dir.setZero();
    for (std::size_t k = start; k < stop; ++k) {
      p.component_gradient(m, order[k], w.y, w.comp);
      w.dir += w.comp;
    }
    w.dir /= static_cast<double>(stop - start);
    counters.component_grads += stop - start;
    if (ctx.observer) ctx.observer->on_inner_step(ctx.epoch, ctx.round, ctx.client, w.dir);
    w.acc += w.dir;
    w.y.noalias() -= alpha * w.dir;
    ++steps;
  }
  w.acc /= static_cast<double>(steps);
  return steps;
}

void local_gd_pass(const Problem& p, std::size_t m, std::size_t steps, double alpha, Workspace& w,
                   OracleCounters& counters, const PassContext& ctx) {
  w.acc.setZero();
  for (std::size_t k = 0; k < steps; ++k) {
    grad_client_into(p, m, w.y, w.dir, w.scratch);
    ++counters.client_grads;
    if (ctx.observer) ctx.observer->on_inner_step(ctx.epoch, ctx.round, ctx.client, w.dir);
    w.acc += w.dir;
    w.y.noalias() -= alpha * w.dir;
  }
  w.acc /= static_cast<double>(steps);
}

}  // namespace clipfl::detail
