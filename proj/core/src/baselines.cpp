#include "clipfl/baselines.hpp"

#include "clipfl/algorithms.hpp"
#include "clipfl/errors.hpp"
#include "passes.hpp"
#include "recorder.hpp"

#include <algorithm>
#include <cmath>

namespace clipfl {

using detail::Recorder;
using detail::Workspace;

namespace {

struct KindName {
  BaselineKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {BaselineKind::kSO, "so"},
    {BaselineKind::kCSO, "cso"},
    {BaselineKind::kNastya, "nastya"},
    {BaselineKind::kLocalGD, "local_gd"},
    {BaselineKind::kCELGC, "celgc"},
    {BaselineKind::kCEFedAvg, "ce_fedavg"},
    {BaselineKind::kCEFedAvgPP, "ce_fedavg_pp"},
    {BaselineKind::kGD, "gd"},
};

// x -= alpha * min(1, clip / ||dir||) * dir, bitwise the unclipped step when
// the clip is inactive.
void clipped_step(ParamVector& x, const ParamVector& dir, double alpha, double clip) {
  const double norm = dir.norm();
  if (norm > clip) {
    x.noalias() -= (alpha * clip / norm) * dir;
  } else {
    x.noalias() -= alpha * dir;
  }
}

RunRecord run_shuffled_sgd(BaselineKind kind, const Problem& p, const BaselineParams& params,
                           const ParamVector& x0, const RunOptions& options) {
  Recorder rec(p, to_string(kind), to_json(kind, params), x0, options);
  const std::size_t N = p.num_components();
  const std::size_t n = p.num_clients() * N;
  ParamVector x = x0;
  ParamVector dir(x.size());
  std::vector<std::size_t> order = detail::data_permutation(options.seed, params.shuffle, 0, n, 0);

  for (std::size_t t = 0; t < options.epochs && !rec.stopped(); ++t) {
    if (t > 0 && params.shuffle == ShuffleMode::kReshuffle) {
      order = detail::data_permutation(options.seed, params.shuffle, t, n, 0);
    }
    const double alpha = params.stepsize.at(t);
    for (std::size_t i : order) {
      p.component_gradient(i / N, i % N, x, dir);
      if (options.observer) options.observer->on_inner_step(t, 0, i / N, dir);
      if (kind == BaselineKind::kCSO) {
        clipped_step(x, dir, alpha, params.clip_level);
      } else {
        x.noalias() -= alpha * dir;
      }
    }
    rec.counters.component_grads += n;
    rec.record(t + 1, x, alpha);
  }
  return rec.finish();
}

RunRecord run_nastya(const Problem& p, const BaselineParams& params, const ParamVector& x0,
                     const RunOptions& options) {
  Recorder rec(p, "nastya", to_json(BaselineKind::kNastya, params), x0, options);
  const std::size_t M = p.num_clients();
  const std::size_t N = p.num_components();
  Workspace w(p.dim());
  ParamVector x = x0;
  ParamVector g(x.size());
  const std::size_t lanes = params.per_client_permutation ? M : 1;
  std::vector<std::vector<std::size_t>> orders(lanes);

  for (std::size_t t = 0; t < options.epochs && !rec.stopped(); ++t) {
    if (t == 0 || params.shuffle == ShuffleMode::kReshuffle) {
      for (std::size_t l = 0; l < lanes; ++l) {
        orders[l] = detail::data_permutation(options.seed, params.shuffle, t, N,
                                             params.per_client_permutation ? l + 1 : 0);
      }
    }
    const double alpha = params.stepsize.at(t);
    g.setZero();
    for (std::size_t m = 0; m < M; ++m) {
      w.y = x;
      detail::rr_pass(p, m, orders[params.per_client_permutation ? m : 0], 1, alpha, w,
                      rec.counters, {t, 0, m, options.observer});
      g += w.acc;
    }
    g /= static_cast<double>(M);
    ++rec.comm_rounds;
    if (options.observer) options.observer->on_pseudogradient(t, g);
    if (!all_finite(g)) {
      rec.abort();
      break;
    }
    const double eta = params.server_stepsize.at(t);
    x.noalias() -= eta * g;
    rec.record(t + 1, x, eta);
  }
  return rec.finish();
}

// One local step direction for client m at w.y, written to w.dir.
void local_direction(const Problem& p, std::size_t m, std::size_t batch, CounterRng& rng,
                     Workspace& w, OracleCounters& counters) {
  if (batch == 0) {
    grad_client_into(p, m, w.y, w.dir, w.scratch);
    ++counters.client_grads;
    return;
  }
  const std::size_t N = p.num_components();
  w.dir.setZero();
  for (std::size_t k = 0; k < batch; ++k) {
    p.component_gradient(m, static_cast<std::size_t>(rng.below(N)), w.y, w.comp);
    w.dir += w.comp;
  }
  w.dir /= static_cast<double>(batch);
  counters.component_grads += batch;
}

RunRecord run_local_family(BaselineKind kind, const Problem& p, const BaselineParams& params,
                           const ParamVector& x0, const RunOptions& options) {
  const std::size_t M = p.num_clients();
  const bool partial = kind == BaselineKind::kCEFedAvgPP;
  const std::size_t C = partial ? params.cohort_size : M;
  if (C == 0 || C > M || M % C != 0) {
    throw ConfigError("cohort_size", "cohort size " + std::to_string(C) +
                                         " must divide the client count " + std::to_string(M));
  }
  if (params.local_steps == 0) throw ConfigError("local_steps", "must be at least 1");
  const std::size_t rounds = M / C;
  const bool server_step = kind == BaselineKind::kCEFedAvg || partial;
  const bool client_clip = server_step;

  Recorder rec(p, to_string(kind), to_json(kind, params), x0, options);
  Workspace w(p.dim());
  ParamVector x = x0;
  ParamVector avg(x.size());
  std::vector<std::size_t> members(M);
  for (std::size_t m = 0; m < M; ++m) members[m] = m;

  for (std::size_t t = 0; t < options.epochs && !rec.stopped(); ++t) {
    const double alpha = params.stepsize.at(t);
    const double eta = params.server_stepsize.at(t);
    double local_sum = 0.0;
    std::size_t local_count = 0;
    bool finite = true;

    for (std::size_t r = 0; r < rounds && finite; ++r) {
      if (partial) {
        auto rng = CounterRng::derive(options.seed, StreamTag::kCohortSampling, {t, r});
        auto perm = random_permutation(M, rng);
        members.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(C));
        if (options.observer) options.observer->on_cohort(t, r, members);
        std::sort(members.begin(), members.end());
      }
      avg.setZero();
      for (std::size_t m : members) {
        auto rng = CounterRng::derive(options.seed, StreamTag::kBatchSampling, {t, r, m});
        w.y = x;
        for (std::size_t k = 0; k < params.local_steps; ++k) {
          local_direction(p, m, params.batch_size, rng, w, rec.counters);
          if (options.observer) options.observer->on_inner_step(t, r, m, w.dir);
          if (client_clip) {
            clipped_step(w.y, w.dir, alpha, params.clip_level);
          } else {
            double step = alpha;
            if (kind == BaselineKind::kCELGC) {
              const double norm = w.dir.norm();
              step = std::isfinite(norm) ? stepsize(params.policy, norm) : 0.0;
              finite = finite && std::isfinite(norm);
              local_sum += step;
              ++local_count;
            }
            w.y.noalias() -= step * w.dir;
          }
        }
        if (options.observer) {
          options.observer->on_client_update(t, r, m, x, w.y, alpha, params.local_steps);
        }
        if (server_step) {
          avg += x - w.y;
        } else {
          avg += w.y;
        }
      }
      avg /= static_cast<double>(C);
      ++rec.comm_rounds;
      finite = finite && all_finite(avg);
      if (server_step) {
        x.noalias() -= eta * avg;
      } else {
        x = avg;
      }
    }
    if (!finite) {
      rec.abort();
      break;
    }
    double logged = alpha;
    if (server_step) logged = eta;
    if (kind == BaselineKind::kCELGC && local_count > 0) {
      logged = local_sum / static_cast<double>(local_count);
    }
    rec.record(t + 1, x, logged);
  }
  return rec.finish();
}

RunRecord run_gd(const Problem& p, const BaselineParams& params, const ParamVector& x0,
                 const RunOptions& options) {
  Recorder rec(p, "gd", to_json(BaselineKind::kGD, params), x0, options);
  Workspace w(p.dim());
  ParamVector x = x0;
  for (std::size_t t = 0; t < options.epochs && !rec.stopped(); ++t) {
    grad_full_into(p, x, w.g, w.comp, w.scratch);
    ++rec.counters.full_grads;
    if (!all_finite(w.g)) {
      rec.abort();
      break;
    }
    const double gamma = stepsize(params.policy, w.g.norm());
    x.noalias() -= gamma * w.g;
    ++rec.comm_rounds;
    rec.record(t + 1, x, gamma);
  }
  return rec.finish();
}

}  // namespace

std::string to_string(BaselineKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  throw UsageError("unknown baseline kind");
}

BaselineKind baseline_kind_from_string(const std::string& name) {
  for (const auto& k : kKindNames) {
    if (name == k.name) return k.kind;
  }
  throw UsageError("unknown baseline kind '" + name + "'");
}

nlohmann::json to_json(BaselineKind kind, const BaselineParams& params) {
  nlohmann::json j{{"kind", to_string(kind)}, {"stepsize", to_json(params.stepsize)}};
  switch (kind) {
    case BaselineKind::kSO:
      j["shuffle"] = to_string(params.shuffle);
      break;
    case BaselineKind::kCSO:
      j["shuffle"] = to_string(params.shuffle);
      j["clip_level"] = params.clip_level;
      break;
    case BaselineKind::kNastya:
      j["shuffle"] = to_string(params.shuffle);
      j["per_client_permutation"] = params.per_client_permutation;
      j["server_stepsize"] = to_json(params.server_stepsize);
      break;
    case BaselineKind::kLocalGD:
      j["local_steps"] = params.local_steps;
      j["batch_size"] = params.batch_size;
      break;
    case BaselineKind::kCELGC:
      j.erase("stepsize");
      j["policy"] = to_json(params.policy);
      j["local_steps"] = params.local_steps;
      j["batch_size"] = params.batch_size;
      break;
    case BaselineKind::kCEFedAvgPP:
      j["cohort_size"] = params.cohort_size;
      [[fallthrough]];
    case BaselineKind::kCEFedAvg:
      j["server_stepsize"] = to_json(params.server_stepsize);
      j["clip_level"] = params.clip_level;
      j["local_steps"] = params.local_steps;
      j["batch_size"] = params.batch_size;
      break;
    case BaselineKind::kGD:
      j.erase("stepsize");
      j["policy"] = to_json(params.policy);
      break;
  }
  return j;
}

RunRecord run_baseline(BaselineKind kind, const Problem& p, const BaselineParams& params,
                       const ParamVector& x0, const RunOptions& options) {
  switch (kind) {
    case BaselineKind::kSO:
    case BaselineKind::kCSO:
      return run_shuffled_sgd(kind, p, params, x0, options);
    case BaselineKind::kNastya:
      return run_nastya(p, params, x0, options);
    case BaselineKind::kLocalGD:
    case BaselineKind::kCELGC:
    case BaselineKind::kCEFedAvg:
    case BaselineKind::kCEFedAvgPP:
      return run_local_family(kind, p, params, x0, options);
    case BaselineKind::kGD:
      return run_gd(p, params, x0, options);
  }
  throw UsageError("unknown baseline kind");
}

}  // namespace clipfl
