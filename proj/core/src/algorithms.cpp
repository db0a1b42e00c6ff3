#include "clipfl/algorithms.hpp"

#include "clipfl/errors.hpp"
#include "passes.hpp"
#include "recorder.hpp"

#include <algorithm>

namespace clipfl {

using detail::PassContext;
using detail::Recorder;
using detail::Workspace;

namespace {

// Stepsize from the norm the policy asks for. Exact mode is evaluated by the
// caller at the start of the outer step and passed in as `exact`.
double outer_stepsize(const ClipPolicy& policy, double exact, const ParamVector& g) {
  if (policy.uses_exact_gradient()) return exact;
  if (policy.mode() == StepsizeMode::kConstant) return stepsize(policy, 0.0);
  return stepsize(policy, g.norm());
}

double exact_stepsize(const Problem& p, const ClipPolicy& policy, const ParamVector& x,
                      Workspace& w, Recorder& rec) {
  if (!policy.uses_exact_gradient()) return 0.0;
  grad_full_into(p, x, w.g, w.comp, w.scratch);
  ++rec.counters.full_grads;
  if (!all_finite(w.g)) {
    rec.abort();
    return 0.0;
  }
  return stepsize(policy, w.g.norm());
}

}  // namespace

nlohmann::json to_json(const ClipPolicy& policy) {
  return {{"c0", policy.c0()}, {"c1", policy.c1()}, {"mode", to_string(policy.mode())}};
}

nlohmann::json to_json(const StepSchedule& schedule) {
  if (schedule.is_constant()) return schedule.values().front();
  return schedule.values();
}

nlohmann::json to_json(const ClipLocalGdjParams& params) {
  nlohmann::json steps = params.schedule.gaps().size() == 1
                             ? nlohmann::json(params.schedule.gaps().front())
                             : nlohmann::json(params.schedule.gaps());
  return {{"kind", "clip_local_gdj"},
          {"local_steps", steps},
          {"inner_stepsize", to_json(params.inner_stepsize)},
          {"policy", to_json(params.policy)}};
}

nlohmann::json to_json(const ClerrParams& params) {
  return {{"kind", "clerr"},
          {"inner_stepsize", to_json(params.inner_stepsize)},
          {"policy", to_json(params.policy)},
          {"shuffle", to_string(params.shuffle)},
          {"per_client_permutation", params.per_client_permutation}};
}

nlohmann::json to_json(const ClippedRrCliParams& params) {
  return {{"kind", "clipped_rr_cli"},
          {"client_stepsize", to_json(params.client_stepsize)},
          {"server_stepsize", to_json(params.server_stepsize)},
          {"policy", to_json(params.policy)},
          {"cohort_size", params.cohort_size},
          {"batch_size", params.batch_size}};
}

RunRecord run_clip_local_gdj(const Problem& p, const ClipLocalGdjParams& params,
                             const ParamVector& x0, const RunOptions& options) {
  Recorder rec(p, "clip_local_gdj", to_json(params), x0, options);
  const std::size_t M = p.num_clients();
  Workspace w(p.dim());
  ParamVector x = x0;
  ParamVector g(x.size());

  for (std::size_t t = 0; t < options.epochs && !rec.stopped(); ++t) {
    const std::size_t K = params.schedule.steps(t);
    const double alpha = params.inner_stepsize.at(t);
    const double exact = exact_stepsize(p, params.policy, x, w, rec);
    if (rec.stopped()) break;

    g.setZero();
    for (std::size_t m = 0; m < M; ++m) {
      w.y = x;
      detail::local_gd_pass(p, m, K, alpha, w, rec.counters, {t, 0, m, options.observer});
      if (options.observer) options.observer->on_client_update(t, 0, m, x, w.y, alpha, K);
      g += w.acc;
    }
    g /= static_cast<double>(M);
    ++rec.comm_rounds;
    if (options.observer) options.observer->on_pseudogradient(t, g);
    if (!all_finite(g)) {
      rec.abort();
      break;
    }

    const double gamma = outer_stepsize(params.policy, exact, g);
    x.noalias() -= gamma * g;
    rec.record(t + 1, x, gamma);
  }
  return rec.finish();
}

RunRecord run_clerr(const Problem& p, const ClerrParams& params, const ParamVector& x0,
                    const RunOptions& options) {
  Recorder rec(p, "clerr", to_json(params), x0, options);
  const std::size_t M = p.num_clients();
  const std::size_t N = p.num_components();
  Workspace w(p.dim());
  ParamVector x = x0;
  ParamVector g(x.size());

  const std::size_t lanes = params.per_client_permutation ? M : 1;
  std::vector<std::vector<std::size_t>> orders(lanes);
  auto refresh = [&](std::size_t t) {
    for (std::size_t l = 0; l < lanes; ++l) {
      const std::size_t lane = params.per_client_permutation ? l + 1 : 0;
      orders[l] = detail::data_permutation(options.seed, params.shuffle, t, N, lane);
    }
  };
  refresh(0);

  for (std::size_t t = 0; t < options.epochs && !rec.stopped(); ++t) {
    if (t > 0 && params.shuffle == ShuffleMode::kReshuffle) refresh(t);
    const double alpha = params.inner_stepsize.at(t);
    const double exact = exact_stepsize(p, params.policy, x, w, rec);
    if (rec.stopped()) break;

    g.setZero();
    for (std::size_t m = 0; m < M; ++m) {
      const auto& order = orders[params.per_client_permutation ? m : 0];
      w.y = x;
      detail::rr_pass(p, m, order, 1, alpha, w, rec.counters, {t, 0, m, options.observer});
      if (options.observer) options.observer->on_client_update(t, 0, m, x, w.y, alpha, N);
      g += w.acc;
    }
    g /= static_cast<double>(M);
    ++rec.comm_rounds;
    if (options.observer) options.observer->on_pseudogradient(t, g);
    if (!all_finite(g)) {
      rec.abort();
      break;
    }

    const double gamma = outer_stepsize(params.policy, exact, g);
    x.noalias() -= gamma * g;
    rec.record(t + 1, x, gamma);
  }
  return rec.finish();
}

RunRecord run_clipped_rr_cli(const Problem& p, const ClippedRrCliParams& params,
                             const ParamVector& x0, const RunOptions& options) {
  const std::size_t M = p.num_clients();
  const std::size_t N = p.num_components();
  const std::size_t C = params.cohort_size;
  if (C == 0 || C > M || M % C != 0) {
    throw ConfigError("cohort_size", "cohort size " + std::to_string(C) +
                                         " must divide the client count " + std::to_string(M));
  }
  if (params.batch_size == 0) throw ConfigError("batch_size", "batch size must be at least 1");

  Recorder rec(p, "clipped_rr_cli", to_json(params), x0, options);
  Workspace w(p.dim());
  ParamVector x = x0;
  ParamVector z(x.size()), gr(x.size()), g(x.size());
  std::vector<std::size_t> members;

  for (std::size_t t = 0; t < options.epochs && !rec.stopped(); ++t) {
    const double client_step = params.client_stepsize.at(t);
    const double server_step = params.server_stepsize.at(t);
    const double exact = exact_stepsize(p, params.policy, x, w, rec);
    if (rec.stopped()) break;

    auto client_rng = CounterRng::derive(options.seed, StreamTag::kClientPermutation, {t});
    const CohortSchedule cohorts = CohortSchedule::make(M, C, client_rng);

    z = x;
    g.setZero();
    bool finite = true;
    for (std::size_t r = 0; r < cohorts.rounds && finite; ++r) {
      members = cohorts.cohorts[r];
      if (options.observer) options.observer->on_cohort(t, r, members);
      std::sort(members.begin(), members.end());
      gr.setZero();
      for (std::size_t m : members) {
        const auto order =
            detail::data_permutation(options.seed, ShuffleMode::kReshuffle, t, N, m + 1);
        w.y = z;
        const std::size_t steps = detail::rr_pass(p, m, order, params.batch_size, client_step, w,
                                                  rec.counters, {t, r, m, options.observer});
        if (options.observer) {
          options.observer->on_client_update(t, r, m, z, w.y, client_step, steps);
        }
        gr += w.acc;
      }
      gr /= static_cast<double>(C);
      ++rec.comm_rounds;
      finite = all_finite(gr);
      z.noalias() -= server_step * gr;
      g += gr;
    }
    g /= static_cast<double>(cohorts.rounds);
    if (options.observer) options.observer->on_pseudogradient(t, g);
    if (!finite || !all_finite(g)) {
      rec.abort();
      break;
    }

    const double theta = outer_stepsize(params.policy, exact, g);
    x.noalias() -= theta * g;
    rec.record(t + 1, x, theta);
  }
  return rec.finish();
}

}  // namespace clipfl
