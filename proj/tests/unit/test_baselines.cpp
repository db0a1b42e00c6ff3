#include "clipfl/baselines.hpp"
#include "clipfl/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <set>

using namespace clipfl;
using namespace clipfl::testing;

namespace {

RunOptions opts(std::size_t epochs, Seed seed = 0, RunObserver* obs = nullptr) {
  RunOptions o;
  o.epochs = epochs;
  o.seed = seed;
  o.observer = obs;
  o.keep_trajectory = true;
  return o;
}

FourthOrderProblem fourth(std::size_t d, std::size_t M, std::size_t N, Seed seed) {
  FourthOrderOptions o;
  o.dim = d;
  o.clients = M;
  o.components = N;
  o.seed = seed;
  return FourthOrderProblem::sample(o);
}

struct MaxNorm : RunObserver {
  double max = 0.0;
  void on_inner_step(std::size_t, std::size_t, std::size_t, const ParamVector& d) override {
    max = std::max(max, d.norm());
  }
};

}  // namespace

TEST_CASE("CSO with an inactive clip equals SO bitwise") {
  const auto p = fourth(2, 2, 6, 1);
  const ParamVector x0 = ParamVector::Constant(2, 2.0);
  BaselineParams so;
  so.stepsize = StepSchedule::constant(1e-4);
  MaxNorm obs;
  const auto a = run_baseline(BaselineKind::kSO, p, so, x0, opts(20, 3, &obs));
  BaselineParams cso = so;
  cso.clip_level = obs.max * 1.01;
  const auto b = run_baseline(BaselineKind::kCSO, p, cso, x0, opts(20, 3));
  CHECK(same_trajectory(a, b));
  cso.clip_level = obs.max * 0.1;
  CHECK_FALSE(same_trajectory(a, run_baseline(BaselineKind::kCSO, p, cso, x0, opts(20, 3))));
}

TEST_CASE("CSO never moves further than stepsize times clip per step") {
  const auto p = fourth(3, 1, 5, 2);
  BaselineParams cso;
  cso.stepsize = StepSchedule::constant(0.1);
  cso.clip_level = 1.0;
  const auto rec = run_baseline(BaselineKind::kCSO, p, cso, ParamVector::Constant(3, 50.0), opts(4, 1));
  for (std::size_t t = 1; t < rec.trajectory.size(); ++t) {
    CHECK((rec.trajectory[t] - rec.trajectory[t - 1]).norm() <= 5 * 0.1 * 1.0 * (1 + 1e-12));
  }
}

TEST_CASE("CE-FedAvg with one client, one step, unit server stepsize and no clip is SGD") {
  const auto p = fourth(2, 1, 10, 3);
  BaselineParams params;
  params.stepsize = StepSchedule::constant(1e-4);
  params.server_stepsize = StepSchedule::constant(1.0);
  params.local_steps = 1;
  params.batch_size = 3;
  const ParamVector x0 = ParamVector::Constant(2, 1.0);
  const auto rec = run_baseline(BaselineKind::kCEFedAvg, p, params, x0, opts(15, 4));

  ParamVector x = x0;
  for (std::size_t t = 0; t < 15; ++t) {
    auto rng = CounterRng::derive(4, StreamTag::kBatchSampling, {t, 0, 0});
    ParamVector d = ParamVector::Zero(2);
    for (int k = 0; k < 3; ++k) d += grad_component(p, 0, rng.below(10), x);
    x -= 1e-4 * (d / 3.0);
    CHECK(rel_err(rec.trajectory[t + 1], x) < 1e-12);
  }
}

TEST_CASE("Nastya with outer stepsize alpha N equals SO epoch for epoch") {
  const auto p = fourth(2, 1, 12, 5);
  const double alpha = 1e-4;
  BaselineParams n;
  n.stepsize = StepSchedule::constant(alpha);
  n.server_stepsize = StepSchedule::constant(alpha * 12);
  BaselineParams so;
  so.stepsize = StepSchedule::constant(alpha);
  const ParamVector x0 = ParamVector::Constant(2, -2.0);
  const auto a = run_baseline(BaselineKind::kNastya, p, n, x0, opts(25, 6));
  const auto b = run_baseline(BaselineKind::kSO, p, so, x0, opts(25, 6));
  for (std::size_t t = 0; t <= 25; ++t) CHECK(rel_err(a.trajectory[t], b.trajectory[t]) < 1e-12);
}

TEST_CASE("CELGC with c1 = 0 is local GD with stepsize 1/c0") {
  const auto p = fourth(2, 3, 4, 7);
  BaselineParams celgc;
  celgc.policy = ClipPolicy(100.0, 0.0, StepsizeMode::kPseudogradient);
  celgc.local_steps = 3;
  BaselineParams lgd;
  lgd.stepsize = StepSchedule::constant(1.0 / 100.0);
  lgd.local_steps = 3;
  const ParamVector x0 = ParamVector::Ones(2);
  const auto a = run_baseline(BaselineKind::kCELGC, p, celgc, x0, opts(10));
  const auto b = run_baseline(BaselineKind::kLocalGD, p, lgd, x0, opts(10));
  CHECK(a.trajectory.back() == b.trajectory.back());
}

TEST_CASE("local GD with one full-gradient step is GD") {
  const auto p = fourth(2, 3, 4, 8);
  BaselineParams lgd;
  lgd.stepsize = StepSchedule::constant(1e-3);
  BaselineParams gd;
  gd.policy = ClipPolicy::constant(1e-3);
  const ParamVector x0 = ParamVector::Ones(2);
  const auto a = run_baseline(BaselineKind::kLocalGD, p, lgd, x0, opts(10));
  const auto b = run_baseline(BaselineKind::kGD, p, gd, x0, opts(10));
  for (std::size_t t = 0; t <= 10; ++t) CHECK(rel_err(a.trajectory[t], b.trajectory[t]) < 1e-12);
  CHECK(b.rows.back().counters.full_grads == 10);
}

TEST_CASE("CE-FedAvg-PP samples distinct cohorts of size C") {
  const auto p = fourth(2, 6, 4, 9);
  BaselineParams params;
  params.stepsize = StepSchedule::constant(1e-4);
  params.server_stepsize = StepSchedule::constant(1.0);
  params.clip_level = 10.0;
  params.cohort_size = 2;
  params.local_steps = 2;
  params.batch_size = 2;
  struct Cohorts : RunObserver {
    std::vector<std::vector<std::size_t>> seen;
    void on_cohort(std::size_t, std::size_t, std::span<const std::size_t> c) override {
      seen.emplace_back(c.begin(), c.end());
    }
  } obs;
  const auto rec = run_baseline(BaselineKind::kCEFedAvgPP, p, params, ParamVector::Ones(2), opts(4, 1, &obs));
  CHECK(obs.seen.size() == 4 * 3);
  for (const auto& c : obs.seen) {
    CHECK(c.size() == 2);
    CHECK(std::set<std::size_t>(c.begin(), c.end()).size() == 2);
  }
  CHECK(rec.rows.back().comm_rounds == 12);
  CHECK(rec.rows.back().counters.component_grads == 12 * 2 * 2 * 2);
  params.cohort_size = 4;
  CHECK_THROWS_AS(run_baseline(BaselineKind::kCEFedAvgPP, p, params, ParamVector::Ones(2), opts(1)),
                  ConfigError);
}

TEST_CASE("CE-FedAvg clips each client step") {
  const auto p = fourth(2, 2, 3, 10);
  BaselineParams params;
  params.stepsize = StepSchedule::constant(0.5);
  params.server_stepsize = StepSchedule::constant(1.0);
  params.clip_level = 2.0;
  params.local_steps = 4;
  const auto rec = run_baseline(BaselineKind::kCEFedAvg, p, params, ParamVector::Constant(2, 30.0), opts(3));
  for (std::size_t t = 1; t < rec.trajectory.size(); ++t) {
    CHECK((rec.trajectory[t] - rec.trajectory[t - 1]).norm() <= 4 * 0.5 * 2.0 * (1 + 1e-12));
  }
}

TEST_CASE("baseline kind names") {
  for (auto k : {BaselineKind::kSO, BaselineKind::kCSO, BaselineKind::kNastya, BaselineKind::kLocalGD,
                 BaselineKind::kCELGC, BaselineKind::kCEFedAvg, BaselineKind::kCEFedAvgPP,
                 BaselineKind::kGD}) {
    CHECK(baseline_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(baseline_kind_from_string("adam"), UsageError);
}

TEST_CASE("baselines are deterministic per seed") {
  const auto p = fourth(2, 4, 5, 11);
  BaselineParams params;
  params.stepsize = StepSchedule::constant(1e-4);
  params.server_stepsize = StepSchedule::constant(2.0);
  params.clip_level = 5.0;
  params.cohort_size = 2;
  params.local_steps = 3;
  params.batch_size = 2;
  for (auto k : {BaselineKind::kSO, BaselineKind::kCSO, BaselineKind::kNastya, BaselineKind::kCEFedAvg,
                 BaselineKind::kCEFedAvgPP}) {
    const auto a = run_baseline(k, p, params, ParamVector::Ones(2), opts(5, 3));
    const auto b = run_baseline(k, p, params, ParamVector::Ones(2), opts(5, 3));
    CHECK(same_trajectory(a, b));
  }
}
