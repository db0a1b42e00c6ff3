#include "clipfl/baselines.hpp"
#include "clipfl/errors.hpp"
#include "clipfl/harness.hpp"
#include "clipfl/io.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <numeric>

using namespace clipfl;
using namespace clipfl::testing;
using nlohmann::json;

namespace {

RunRecord fake_record(const std::vector<double>& residuals, bool diverged = false, Seed seed = 0) {
  RunRecord r;
  r.seed = seed;
  for (std::size_t t = 0; t < residuals.size(); ++t) {
    EpochRow row;
    row.epoch = t;
    row.f_residual = residuals[t];
    row.grad_norm = 2 * residuals[t];
    r.rows.push_back(row);
  }
  r.status = diverged ? RunStatus::kDiverged : RunStatus::kFinished;
  r.final_x = ParamVector::Zero(1);
  return r;
}

// GD on 1/2 * 4 (x - 1)^2 with the stepsize taken from the config.
CellRunner gd_runner(std::size_t epochs) {
  return [epochs](const json& config, Seed seed) {
    ParamVector h(1);
    h << 4.0;
    const QuadraticProblem p(h, Matrix::Ones(1, 1), 1);
    BaselineParams params;
    params.policy = ClipPolicy::constant(config.at("stepsize").get<double>());
    RunOptions o;
    o.epochs = epochs;
    o.seed = seed;
    return run_baseline(BaselineKind::kGD, p, params, ParamVector::Constant(1, 3.0 + seed), o);
  };
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("clipfl_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("selection window covers the trailing rows") {
  CHECK(selection_window(100, 0.25) == std::pair<std::size_t, std::size_t>{75, 100});
  CHECK(selection_window(101, 0.25) == std::pair<std::size_t, std::size_t>{75, 101});
  CHECK(selection_window(1, 0.25) == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(selection_window(10, 1.0) == std::pair<std::size_t, std::size_t>{0, 10});
  CHECK_THROWS_AS(selection_window(10, 0.0), UsageError);
  CHECK_THROWS_AS(selection_window(10, 1.5), UsageError);
}

TEST_CASE("record scores") {
  const auto r = fake_record({8, 4, 2, 1});
  CHECK(score_record(r, {SelectionMetric::kMeanLoss, 0.5}) == 1.5);
  CHECK(score_record(r, {SelectionMetric::kMeanGradNorm, 0.5}) == 3.0);
  CHECK(score_record(r, {SelectionMetric::kFinalLoss, 0.5}) == 1.0);
  CHECK(std::isinf(score_record(fake_record({1, 2}, true), {})));
  for (auto m : {SelectionMetric::kMeanLoss, SelectionMetric::kMeanGradNorm, SelectionMetric::kFinalLoss}) {
    CHECK(selection_metric_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(selection_metric_from_string("median"), UsageError);
}

TEST_CASE("dotted paths") {
  json j = json::object();
  set_dotted(j, "policy.c0", 3.0);
  set_dotted(j, "inner_stepsize", 0.5);
  CHECK(j == json{{"policy", {{"c0", 3.0}}}, {"inner_stepsize", 0.5}});
  CHECK(get_dotted(j, "policy.c0") == 3.0);
  CHECK_THROWS_AS(get_dotted(j, "policy.c1"), UsageError);
  CHECK_THROWS_AS(set_dotted(j, "a..b", 1), UsageError);
}

TEST_CASE("grid expansion is a cartesian product, last axis fastest") {
  GridSpec spec;
  spec.axes = {{"a", {1, 2}}, {"b.c", {10, 20, 30}}};
  const auto cells = expand_grid(json{{"k", "x"}}, spec);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0] == json{{"k", "x"}, {"a", 1.0}, {"b", {{"c", 10.0}}}});
  CHECK(cells[1].at("b").at("c") == 20.0);
  CHECK(cells[3].at("a") == 2.0);
  CHECK(cells[3].at("b").at("c") == 10.0);
  spec.axes = {};
  CHECK(expand_grid(json{{"k", 1}}, spec).size() == 1);
}

TEST_CASE("one-point grid returns its only cell") {
  GridSpec spec;
  spec.axes = {{"stepsize", {0.1}}};
  spec.seeds = {0, 1};
  const auto r = run_grid(spec, json::object(), gd_runner(10), {});
  CHECK(r.cells.size() == 1);
  CHECK(r.best == 0);
  CHECK(r.cells[0].records.size() == 2);
  CHECK_FALSE(r.all_diverged);
}

TEST_CASE("grid search picks the stepsize 1/L and ranks divergence last") {
  GridSpec spec;
  spec.axes = {{"stepsize", {0.05, 0.1, 0.25, 0.4, 1.0}}, {"dummy", {3, 1, 2}}};
  spec.seeds = {0, 1, 2};
  const auto r = run_grid(spec, json::object(), gd_runner(30), {});
  REQUIRE(r.cells.size() == 15);
  const auto& best = r.cells[r.best].config;
  CHECK(best.at("stepsize") == 0.25);
  CHECK(best.at("dummy") == 1.0);
  CHECK(r.cells[r.best].score == 0.0);
  for (std::size_t i = 12; i < 15; ++i) {
    CHECK(std::isinf(r.cells[i].score));
    CHECK(r.cells[i].records[0].diverged());
  }
}

TEST_CASE("all-diverged grid prefers more completed epochs") {
  GridSpec spec;
  spec.axes = {{"stepsize", {1.0, 2.0}}};
  spec.seeds = {0};
  const auto r = run_grid(spec, json::object(), gd_runner(200), {});
  CHECK(r.all_diverged);
  CHECK(r.best == 0);
  CHECK(r.cells[0].epochs_completed > r.cells[1].epochs_completed);
}

TEST_CASE("execution order and worker count never change results") {
  GridSpec spec;
  spec.axes = {{"stepsize", {0.05, 0.1, 0.2}}};
  spec.seeds = {0, 1, 2, 3};
  const auto base = run_grid(spec, json::object(), gd_runner(15), {});
  GridOptions opt;
  opt.workers = 3;
  opt.execution_order.resize(12);
  std::iota(opt.execution_order.rbegin(), opt.execution_order.rend(), 0);
  std::swap(opt.execution_order[2], opt.execution_order[7]);
  const auto other = run_grid(spec, json::object(), gd_runner(15), {}, opt);
  CHECK(other.best == base.best);
  for (std::size_t c = 0; c < base.cells.size(); ++c) {
    CHECK(other.cells[c].score == base.cells[c].score);
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(same_trajectory(other.cells[c].records[s], base.cells[c].records[s]));
    }
  }
  opt.execution_order = {0, 0, 1};
  CHECK_THROWS_AS(run_grid(spec, json::object(), gd_runner(1), {}, opt), UsageError);
}

TEST_CASE("aggregation over seeds") {
  const auto a = aggregate_series({fake_record({1, 1}), fake_record({3, 5})}, Reducer::kMedian);
  REQUIRE(a.size() == 2);
  CHECK(a[0].value == 2.0);
  CHECK(a[1].value == 3.0);
  CHECK(a[1].lo == 1.0);
  CHECK(a[1].hi == 5.0);
  const auto one = aggregate_series({fake_record({7, 6})}, Reducer::kMean, SeriesMetric::kGradNorm);
  CHECK(one[1].value == 12.0);
  CHECK(one[1].lo == 12.0);
  const auto padded =
      aggregate_series({fake_record({1, 1, 1}), fake_record({1, 2}, true), fake_record({1, 3, 3})},
                       Reducer::kMedian);
  REQUIRE(padded.size() == 3);
  CHECK(padded[1].value == 2.0);
  CHECK(padded[2].value == 3.0);
  CHECK(std::isinf(padded[2].hi));
  CHECK_THROWS_AS(aggregate_series({}, Reducer::kMean), UsageError);
  CHECK_THROWS_AS(aggregate_series({fake_record({1}), fake_record({1, 2})}, Reducer::kMean), UsageError);
  CHECK(series_csv(a).rfind("epoch,", 0) == 0);
}

TEST_CASE("grid results on disk") {
  GridSpec spec;
  spec.axes = {{"stepsize", {0.1, 0.2}}};
  spec.seeds = {0, 5};
  const auto r = run_grid(spec, json::object(), gd_runner(5), {});
  const auto root = scratch_dir("grid");
  const json identity{{"name", "unit"}};
  const auto dir = write_grid_results(root, identity, r, {});
  CHECK(dir == root / "runs" / json_hash(identity));
  for (const auto& cell : r.cells) {
    for (Seed s : spec.seeds) {
      const auto file = dir / json_hash(cell.config) / (std::to_string(s) + ".csv");
      REQUIRE(std::filesystem::exists(file));
      CHECK(read_file(file) == record_csv(cell.records[s == 0 ? 0 : 1]));
    }
  }
  const auto summary = json::parse(read_file(dir / "summary.json"));
  CHECK(summary.at("best_config") == r.cells[r.best].config);
  CHECK(summary.at("cells").size() == 2);
  std::filesystem::remove_all(root);
}
