#include "clipfl/experiments.hpp"

#include "clipfl/errors.hpp"
#include "clipfl/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace clipfl {

namespace {

using nlohmann::json;

std::vector<Seed> seed_range(std::size_t n) {
  std::vector<Seed> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

json fourth_order(std::size_t dim, std::size_t clients, std::size_t per_client, bool sorted) {
  return {{"kind", "fourth_order"},
          {"dim", dim},
          {"clients", clients},
          {"components", per_client},
          {"shift_range", 10.0},
          {"sort_by_norm", sorted}};
}

FigureSetup fig1() {
  FigureSetup f;
  f.id = "fig1";
  f.problem = fourth_order(1, 1, 1000, false);
  f.x0 = 20.0;
  f.epochs = 45;
  f.seeds = seed_range(10);
  f.rule = {SelectionMetric::kMeanLoss, 0.5};
  const auto steps = decade_grid(1e-8, 1e-2);
  const auto clips = decade_grid(1e0, 1e5);
  f.methods = {
      {"SO", {{"kind", "so"}, {"stepsize", 1e-7}, {"shuffle", "shuffle_once"}}, {{"stepsize", steps}}},
      {"CSO",
       {{"kind", "cso"}, {"stepsize", 1e-4}, {"clip_level", 1e4}, {"shuffle", "shuffle_once"}},
       {{"stepsize", steps}, {"clip_level", clips}}},
      {"CLERR",
       {{"kind", "clerr"},
        {"inner_stepsize", 1e-7},
        {"policy", {{"beta", 1e-4}, {"lambda", 1e5}}},
        {"shuffle", "shuffle_once"}},
       {{"policy.beta", steps}, {"policy.lambda", clips}}},
      {"Nastya",
       {{"kind", "nastya"}, {"stepsize", 1e-7}, {"server_stepsize", 1e-7}, {"shuffle", "shuffle_once"}},
       {{"server_stepsize", steps}}},
  };
  f.notes = {{"inner_stepsize", 1e-7}, {"shuffle", "shuffle_once"}};
  return f;
}

FigureSetup fig3(bool tens) {
  FigureSetup f;
  f.id = tens ? "fig3b" : "fig3a";
  f.problem = fourth_order(100, 10, 100, true);
  f.x0 = json::array();
  for (int i = 0; i < 100; ++i) f.x0.push_back(tens ? 10.0 : 1.0);
  f.epochs = 100;
  f.seeds = seed_range(10);
  f.rule = {SelectionMetric::kMeanLoss, 0.25};

  const double clgdj_c1 = tens ? 1e-2 : 1e-10;
  const double celgc_c0 = tens ? 1e5 : 1e4;
  const double fedavg_client = tens ? 1e-5 : 1e-4;
  const auto celgc_range = tens ? decade_grid(1e-10, 1e10) : decade_grid(1e-15, 1e10);
  const auto server_range = tens ? decade_grid(1e-10, 1.0) : decade_grid(1e-10, 1e3);
  f.methods = {
      {"C-LGDJ",
       {{"kind", "clip_local_gdj"},
        {"local_steps", 1},
        {"inner_stepsize", 1e-10},
        {"policy", {{"c0", 1e4}, {"c1", clgdj_c1}}}},
       {{"inner_stepsize", decade_grid(1e-10, 1.0)},
        {"policy.c0", decade_grid(1e-10, 1e6)},
        {"policy.c1", decade_grid(1e-10, 1e6)}}},
      {"CELGC",
       {{"kind", "celgc"},
        {"local_steps", 1},
        {"batch_size", 0},
        {"policy", {{"c0", celgc_c0}, {"c1", 1e-10}}}},
       {{"policy.c0", celgc_range}, {"policy.c1", celgc_range}}},
      {"CE-FedAvg",
       {{"kind", "ce_fedavg"},
        {"local_steps", 1},
        {"batch_size", 0},
        {"stepsize", fedavg_client},
        {"server_stepsize", 1.0},
        {"clip_level", 10.0}},
       {{"stepsize", decade_grid(1e-10, 1.0)},
        {"server_stepsize", server_range},
        {"clip_level", decade_grid(1.0, 1e4)}}},
  };
  f.notes = {{"local_steps", 1}, {"sorted_shards", true}};
  return f;
}

FigureSetup fig4() {
  FigureSetup f;
  f.id = "fig4";
  f.problem = fourth_order(100, 10, 100, true);
  f.x0 = json::array();
  for (int i = 0; i < 100; ++i) f.x0.push_back(1.0);
  f.epochs = 100;
  f.seeds = seed_range(10);
  f.rule = {SelectionMetric::kMeanLoss, 0.25};
  f.methods = {
      {"CRR-CLI",
       {{"kind", "clipped_rr_cli"},
        {"client_stepsize", 1e-10},
        {"server_stepsize", 1e-10},
        {"policy", {{"c0", 1e6}, {"c1", 1e-10}}},
        {"cohort_size", 2},
        {"batch_size", 16}},
       {{"client_stepsize", decade_grid(1e-10, 1e6)},
        {"server_stepsize", decade_grid(1e-10, 1e6)},
        {"policy.c0", decade_grid(1e-10, 1e5)},
        {"policy.c1", decade_grid(1e-10, 1e5)}}},
      {"CE-FedAvg-PP",
       {{"kind", "ce_fedavg_pp"},
        {"stepsize", 1e-6},
        {"server_stepsize", 10.0},
        {"clip_level", 1.0},
        {"local_steps", 10},
        {"batch_size", 16},
        {"cohort_size", 2}},
       {{"stepsize", decade_grid(1e-10, 1e3)},
        {"server_stepsize", decade_grid(1e-10, 1e3)},
        {"clip_level", decade_grid(1.0, 1e4)}}},
  };
  f.notes = {{"cohort_size", 2}, {"batch_size", 16}, {"sorted_shards", true}};
  return f;
}

FigureSetup logreg() {
  FigureSetup f;
  f.id = "logreg";
  f.problem = {{"kind", "logistic"},
               {"clients", 1},
               {"l2_reg", 0.0},
               {"synthetic", {{"samples", 2000}, {"dim", 500}, {"density", 0.1}}}};
  f.x0 = 0.0;
  f.epochs = 50;
  f.seeds = seed_range(3);
  f.rule = {SelectionMetric::kMeanLoss, 0.25};
  const auto steps = decade_grid(1e-3, 1e-1);
  const auto clips = decade_grid(1.0, 1e2);
  f.methods = {
      {"CSO",
       {{"kind", "cso"}, {"stepsize", 1e-2}, {"clip_level", 10.0}, {"shuffle", "shuffle_once"}},
       {{"stepsize", steps}, {"clip_level", clips}}},
      {"CLERR",
       {{"kind", "clerr"},
        {"inner_stepsize", 1e-2},
        {"policy", {{"beta", 1e-2}, {"lambda", 10.0}}},
        {"shuffle", "shuffle_once"}},
       {{"inner_stepsize", steps}, {"policy.beta", steps}, {"policy.lambda", clips}}},
      {"Clip-GD",
       {{"kind", "gd"}, {"policy", {{"beta", 1e-2}, {"lambda", 10.0}}}},
       {{"policy.beta", steps}, {"policy.lambda", clips}}},
  };
  f.notes = {{"dataset", "synthetic sparse stand-in; set problem.path to a libsvm file for real data"}};
  return f;
}

// Lazily built problem instances shared by every method of a figure.
class InstanceCache {
 public:
  explicit InstanceCache(const RunConfig& config) : config_(config) {}

  std::shared_ptr<const Instance> get(Seed seed) {
    std::lock_guard lock(mutex_);
    auto& slot = cache_[seed];
    if (!slot) slot = std::make_shared<const Instance>(make_instance(config_, seed));
    return slot;
  }

 private:
  const RunConfig& config_;
  std::mutex mutex_;
  std::map<Seed, std::shared_ptr<const Instance>> cache_;
};

}  // namespace

std::vector<std::string> figure_ids() { return {"fig1", "fig3a", "fig3b", "fig4", "logreg"}; }

FigureSetup figure_setup(const std::string& id) {
  if (id == "fig1") return fig1();
  if (id == "fig3a") return fig3(false);
  if (id == "fig3b") return fig3(true);
  if (id == "fig4") return fig4();
  if (id == "logreg") return logreg();
  throw UsageError("unknown figure '" + id + "' (expected fig1, fig3a, fig3b, fig4 or logreg)");
}

std::vector<double> decade_grid(double lo, double hi) {
  const long a = std::lround(std::log10(lo));
  const long b = std::lround(std::log10(hi));
  if (b < a) throw UsageError("decade grid needs lo <= hi");
  std::vector<double> out;
  for (long e = a; e <= b; ++e) out.push_back(std::stod("1e" + std::to_string(e)));
  return out;
}

std::vector<double> thin_grid(const std::vector<double>& full, double scale, double anchor) {
  if (!(scale >= 0.0 && scale <= 1.0)) throw UsageError("grid scale must lie in [0, 1]");
  if (scale == 0.0) return {anchor};
  const auto stride = static_cast<std::ptrdiff_t>(std::max(1L, std::lround(1.0 / scale)));
  const auto it = std::find(full.begin(), full.end(), anchor);
  std::vector<double> out;
  if (it == full.end()) {
    for (std::size_t i = 0; i < full.size(); i += static_cast<std::size_t>(stride)) out.push_back(full[i]);
    out.push_back(anchor);
    std::sort(out.begin(), out.end());
    return out;
  }
  const auto idx = it - full.begin();
  for (std::ptrdiff_t i = idx % stride; i < static_cast<std::ptrdiff_t>(full.size()); i += stride) {
    out.push_back(full[static_cast<std::size_t>(i)]);
  }
  return out;
}

ReproduceResult reproduce(const FigureSetup& figure, const ReproduceOptions& options) {
  RunConfig config;
  config.problem = figure.problem;
  config.x0 = figure.x0;
  config.epochs = options.epochs ? options.epochs : figure.epochs;
  const std::vector<Seed> seeds = options.seeds.empty() ? figure.seeds : options.seeds;

  InstanceCache cache(config);
  ReproduceResult result;
  json methods = json::object();

  for (const auto& method : figure.methods) {
    GridSpec spec;
    spec.seeds = seeds;
    for (const auto& axis : method.axes) {
      const double anchor = get_dotted(method.algorithm, axis.name).get<double>();
      spec.axes.push_back({axis.name, thin_grid(axis.values, options.grid_scale, anchor)});
    }
    spec.primary_param = method.axes.empty() ? "" : method.axes.front().name;
    for (const auto& cell : expand_grid(method.algorithm, spec)) parse_algorithm(cell);

    CellRunner runner = [&](const json& algorithm, Seed seed) {
      const auto instance = cache.get(seed);
      return run_config(config, *instance, seed, &algorithm);
    };
    MethodOutcome outcome;
    outcome.name = method.name;
    outcome.grid = run_grid(spec, method.algorithm, runner, figure.rule, {options.workers, {}});
    const GridCell& best = outcome.grid.cells[outcome.grid.best];
    outcome.series = aggregate_series(best.records, Reducer::kMedian);

    json axes = json::object();
    for (const auto& axis : spec.axes) axes[axis.name] = axis.values;
    const json identity{{"figure", figure.id},
                        {"method", method.name},
                        {"problem", figure.problem},
                        {"x0", figure.x0},
                        {"epochs", config.epochs},
                        {"seeds", seeds},
                        {"base", method.algorithm},
                        {"axes", axes}};
    if (options.write_runs) write_grid_results(options.out, identity, outcome.grid, figure.rule);
    write_file(options.out / (method.name + ".csv"), series_csv(outcome.series));

    methods[method.name] = {{"winner", best.config},
                            {"reference", method.algorithm},
                            {"score", best.score},
                            {"configs", outcome.grid.cells.size()},
                            {"all_diverged", outcome.grid.all_diverged},
                            {"grid_hash", json_hash(identity)},
                            {"series", method.name + ".csv"}};
    result.methods.push_back(std::move(outcome));
  }

  json manifest{{"figure", figure.id},
                {"problem", figure.problem},
                {"x0", figure.x0},
                {"epochs", config.epochs},
                {"seeds", seeds},
                {"grid_scale", options.grid_scale},
                {"selection", {{"metric", to_string(figure.rule.metric)}, {"window", figure.rule.window}}},
                {"methods", methods}};
  for (const auto& [key, value] : figure.notes.items()) manifest[key] = value;
  write_file(options.out / "manifest.json", canonical_json(manifest, 2) + "\n");
  result.manifest = std::move(manifest);
  return result;
}

}  // namespace clipfl
