#include "clipfl/config.hpp"
#include "clipfl/diagnostics.hpp"
#include "clipfl/errors.hpp"
#include "clipfl/experiments.hpp"
#include "clipfl/fstar.hpp"
#include "clipfl/harness.hpp"
#include "clipfl/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace clipfl;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string seeds;
  std::size_t workers = 0;
  double grid_scale = 1.0;
  std::string figure;
  std::size_t epochs = 0;
  std::size_t probes = 1000;
  std::string level = "joint";
  bool no_runs = false;
};

Seed parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError("--seeds", "bad seed '" + text + "'");
  return v;
}

// "3", "0,4,7" or "0-9".
std::vector<Seed> parse_seeds(const std::string& text) {
  std::vector<Seed> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const std::size_t dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_seed(item));
    } else {
      const Seed lo = parse_seed(item.substr(0, dash));
      const Seed hi = parse_seed(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("--seeds", "empty range '" + item + "'");
      for (Seed s = lo; s <= hi; ++s) out.push_back(s);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t worker_count(std::size_t flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("CLIPFL_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("CLIPFL_WORKERS", "expected a positive integer");
  }
  return 1;
}

fs::path output_dir(const std::string& flag, const std::optional<std::string>& from_config,
                    const std::string& fallback) {
  fs::path p = !flag.empty() ? fs::path(flag) : from_config ? fs::path(*from_config) : fs::path(fallback);
  if (p.is_relative()) {
    if (const char* root = std::getenv("CLIPFL_OUTPUT_ROOT"); root && *root) p = fs::path(root) / p;
  }
  return p;
}

Seed single_seed(const Options& o, const RunConfig& config) {
  if (o.seeds.empty()) return config.seed;
  const auto seeds = parse_seeds(o.seeds);
  if (seeds.size() != 1) throw ConfigError("--seeds", "this command takes exactly one seed");
  return seeds.front();
}

int cmd_run(const Options& o) {
  const RunConfig config = load_run_config(o.config);
  const Seed seed = single_seed(o, config);
  const fs::path out = output_dir(o.out, config.output, "out");
  const Instance instance = make_instance(config, seed);
  const RunRecord record = run_config(config, instance, seed);

  write_file(out / "record.csv", record_csv(record));
  write_file(out / "record.json", canonical_json(record_json(record), 2) + "\n");
  const auto& last = record.rows.back();
  std::cout << "status " << to_string(record.status) << '\n'
            << "f_residual " << format_shortest(last.f_residual) << '\n'
            << "grad_norm " << format_shortest(last.grad_norm) << '\n';
  return exit_code::kOk;
}

int cmd_grid(const Options& o) {
  const RunConfig config = load_run_config(o.config);
  if (!config.grid) throw ConfigError("grid", "the grid command needs a grid block");
  GridSpec spec = config.grid->spec;
  if (!o.seeds.empty()) spec.seeds = parse_seeds(o.seeds);
  if (spec.seeds.empty()) spec.seeds = {config.seed};
  const fs::path out = output_dir(o.out, config.output, "out");

  std::vector<Instance> instances;
  for (Seed s : spec.seeds) instances.push_back(make_instance(config, s));
  CellRunner runner = [&](const json& algorithm, Seed seed) {
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
      if (spec.seeds[i] == seed) return run_config(config, instances[i], seed, &algorithm);
    }
    throw InvariantError("seed outside the grid");
  };
  const GridResult result =
      run_grid(spec, config.algorithm, runner, config.grid->rule, {worker_count(o.workers), {}});

  json axes = json::object();
  for (const auto& axis : spec.axes) axes[axis.name] = axis.values;
  const json identity{{"problem", config.problem}, {"x0", config.x0},     {"epochs", config.epochs},
                      {"base", config.algorithm},  {"axes", axes},        {"seeds", spec.seeds}};
  const fs::path dir = write_grid_results(out, identity, result, config.grid->rule);
  const auto& best = result.cells[result.best];
  std::cout << "summary " << (dir / "summary.json").string() << '\n'
            << "best " << canonical_json(best.config) << '\n'
            << "score " << format_shortest(best.score) << '\n';
  if (result.all_diverged) std::cout << "all configurations diverged\n";
  return exit_code::kOk;
}

int cmd_reproduce(const Options& o) {
  const FigureSetup figure = figure_setup(o.figure);
  ReproduceOptions ro;
  ro.out = output_dir(o.out, std::nullopt, "reproduce/" + o.figure);
  ro.grid_scale = o.grid_scale;
  ro.workers = worker_count(o.workers);
  if (!o.seeds.empty()) ro.seeds = parse_seeds(o.seeds);
  ro.epochs = o.epochs;
  ro.write_runs = !o.no_runs;
  const ReproduceResult result = reproduce(figure, ro);
  for (const auto& m : result.methods) {
    const auto& best = m.grid.cells[m.grid.best];
    std::cout << m.name << ' ' << canonical_json(best.config) << " final "
              << format_shortest(m.series.back().value) << '\n';
  }
  std::cout << "manifest " << (ro.out / "manifest.json").string() << '\n';
  return exit_code::kOk;
}

void emit(const json& report, const Options& o, const RunConfig& config, const std::string& name) {
  const std::string text = canonical_json(report, 2) + "\n";
  if (!o.out.empty() || config.output) {
    write_file(output_dir(o.out, config.output, "out") / name, text);
  }
  std::cout << text;
}

int cmd_fstar(const Options& o) {
  const RunConfig config = load_run_config(o.config);
  const Seed seed = single_seed(o, config);
  const auto problem = make_problem(config.problem, seed, config.base_dir);
  const ParamVector x0 = make_x0(config.x0, problem->dim());
  const FStarCertificate cert = solve_fstar(*problem, x0, FStarOptions{});
  std::vector<double> xs(cert.x_star.data(), cert.x_star.data() + cert.x_star.size());
  const json report{{"seed", seed},
                    {"f_star", cert.f_star},
                    {"grad_norm_at_star", cert.grad_norm_at_star},
                    {"iterations", cert.iterations},
                    {"x_star", xs}};
  emit(report, o, config, "fstar.json");
  return exit_code::kOk;
}

int cmd_diag(const Options& o) {
  const RunConfig config = load_run_config(o.config);
  const Seed seed = single_seed(o, config);
  const ObjectiveLevel level = objective_level_from_string(o.level);
  const Instance instance = make_instance(config, seed);
  const RunRecord record = run_config(config, instance, seed, nullptr, true);
  const Problem& p = *instance.problem;

  const auto probes = make_probes(record.trajectory, o.probes, seed);
  const SmoothnessEstimate fit = estimate_L0L1(p, probes, level);
  const CheckReport descent = check_descent_lemma(p, probes, fit.L0, fit.L1);
  const CheckReport bound = check_gradient_bound(p, record.trajectory, fit.L0, fit.L1, instance.f_star);
  const CheckReport symmetric = check_symmetric_smoothness(p, probes, fit.L0, fit.L1);

  json report{{"seed", seed},
              {"f_star", instance.f_star},
              {"trajectory_points", record.trajectory.size()},
              {"run_status", to_string(record.status)},
              {"smoothness", to_json(fit)},
              {"descent_lemma", to_json(descent)},
              {"gradient_bound", to_json(bound)},
              {"symmetric_smoothness", to_json(symmetric)}};
  try {
    report["pl"] = to_json(estimate_pl(p, record.trajectory, instance.f_star));
  } catch (const InputError& e) {
    report["pl"] = {{"error", e.what()}};
  }
  emit(report, o, config, "diag.json");
  return exit_code::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clipped federated optimization experiments"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->required();
    sub->add_option("--out", o.out, "output directory (relative paths resolve under CLIPFL_OUTPUT_ROOT)");
  };

  auto* run = app.add_subcommand("run", "run one algorithm for one seed");
  add_config(run);
  run->add_option("--seeds", o.seeds, "seed override");

  auto* grid = app.add_subcommand("grid", "grid search with the config's grid block");
  add_config(grid);
  grid->add_option("--seeds", o.seeds, "seed list: 3, 0,4,7 or 0-9");
  grid->add_option("--workers", o.workers, "worker threads (default CLIPFL_WORKERS or 1)");

  auto* repro = app.add_subcommand("reproduce", "regenerate a canned experiment");
  repro->add_option("figure", o.figure, "fig1, fig3a, fig3b, fig4 or logreg")->required();
  repro->add_option("--out", o.out, "output directory");
  repro->add_option("--seeds", o.seeds, "seed list: 3, 0,4,7 or 0-9");
  repro->add_option("--workers", o.workers, "worker threads (default CLIPFL_WORKERS or 1)");
  repro->add_option("--grid-scale", o.grid_scale, "grid density in [0, 1]; 0 runs the reference point only")
      ->check(CLI::Range(0.0, 1.0));
  repro->add_option("--epochs", o.epochs, "override the epoch budget");
  repro->add_flag("--no-runs", o.no_runs, "skip per-run CSVs");

  auto* fstar = app.add_subcommand("fstar", "solve for f* and print its certificate");
  add_config(fstar);
  fstar->add_option("--seeds", o.seeds, "seed override");

  auto* diag = app.add_subcommand("diag", "fit (L0, L1) along a run and check the smoothness lemmas");
  add_config(diag);
  diag->add_option("--seeds", o.seeds, "seed override");
  diag->add_option("--probes", o.probes, "probe pairs")->check(CLI::PositiveNumber);
  diag->add_option("--level", o.level, "f, f_m, f_mj or joint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::kOk : exit_code::kConfig;
  }

  try {
    if (*run) return cmd_run(o);
    if (*grid) return cmd_grid(o);
    if (*repro) return cmd_reproduce(o);
    if (*fstar) return cmd_fstar(o);
    if (*diag) return cmd_diag(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return exit_code::kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return exit_code::kInternal;
  }
  return exit_code::kInternal;
}
