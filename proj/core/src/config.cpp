#include "clipfl/config.hpp"

#include "clipfl/errors.hpp"
#include "clipfl/fourth_order.hpp"
#include "clipfl/fstar.hpp"
#include "clipfl/io.hpp"
#include "clipfl/libsvm.hpp"
#include "clipfl/logistic.hpp"
#include "clipfl/quadratic.hpp"

#include <cmath>
#include <set>

namespace clipfl {

namespace {

using nlohmann::json;

// Typed access to one JSON object that remembers which keys were read, so
// leftovers can be rejected as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(at(key), "is required");
    return j_.at(key);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::size_t count(const std::string& key) { return as_count(raw(key), at(key)); }
  std::size_t count(const std::string& key, std::size_t fallback) {
    return has(key) ? count(key) : fallback;
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : fallback;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(at(key), "unknown key");
    }
  }

  static std::size_t as_count(const json& v, const std::string& field) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) {
      if (v.get<long long>() < 0) throw ConfigError(field, "must be nonnegative");
      return static_cast<std::size_t>(v.get<long long>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d == std::floor(d) && d < 9.0e15) return static_cast<std::size_t>(d);
    }
    throw ConfigError(field, "expected a nonnegative integer");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Wraps library validation errors with the config field they came from.
template <class F>
auto guarded(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const UsageError& e) {
    throw ConfigError(field, e.what());
  } catch (const InputError& e) {
    throw ConfigError(field, e.what());
  }
}

StepSchedule parse_schedule(const json& v, const std::string& field) {
  std::vector<double> values;
  if (v.is_number()) {
    values.push_back(v.get<double>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(field, "expected numbers");
      values.push_back(e.get<double>());
    }
  } else {
    throw ConfigError(field, "expected a number or an array of numbers");
  }
  return guarded(field, [&] { return StepSchedule(values); });
}

StepSchedule schedule(Fields& f, const std::string& key) { return parse_schedule(f.raw(key), f.at(key)); }
StepSchedule schedule(Fields& f, const std::string& key, double fallback) {
  return f.has(key) ? schedule(f, key) : StepSchedule::constant(fallback);
}

LocalSchedule parse_local_schedule(Fields& f) {
  const bool steps = f.has("local_steps");
  const bool times = f.has("sync_times");
  if (steps && times) throw ConfigError(f.at("sync_times"), "give either local_steps or sync_times");
  if (times) {
    const json& v = f.raw("sync_times");
    if (!v.is_array()) throw ConfigError(f.at("sync_times"), "expected an array");
    std::vector<std::size_t> t;
    for (const auto& e : v) t.push_back(Fields::as_count(e, f.at("sync_times")));
    return guarded(f.at("sync_times"), [&] { return LocalSchedule::from_sync_times(t); });
  }
  if (!steps) return LocalSchedule::uniform(1);
  const json& v = f.raw("local_steps");
  if (v.is_array()) {
    std::vector<std::size_t> times{0};
    for (const auto& e : v) {
      const std::size_t gap = Fields::as_count(e, f.at("local_steps"));
      times.push_back(times.back() + gap);
    }
    return guarded(f.at("local_steps"), [&] { return LocalSchedule::from_sync_times(times); });
  }
  const std::size_t gap = f.count("local_steps");
  return guarded(f.at("local_steps"), [&] { return LocalSchedule::uniform(gap); });
}

ShuffleMode shuffle(Fields& f, ShuffleMode fallback) {
  if (!f.has("shuffle")) return fallback;
  const std::string s = f.text("shuffle");
  return guarded(f.at("shuffle"), [&] { return shuffle_mode_from_string(s); });
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

ClipPolicy parse_policy(const json& j, const std::string& field) {
  Fields f(j, field);
  StepsizeMode mode = StepsizeMode::kPseudogradient;
  if (f.has("mode")) {
    const std::string m = f.text("mode");
    mode = guarded(f.at("mode"), [&] { return stepsize_mode_from_string(m); });
  }
  const bool c = f.has("c0") || f.has("c1");
  const bool bl = f.has("beta") || f.has("lambda");
  const bool st = f.has("stepsize");
  if (int(c) + int(bl) + int(st) != 1) {
    throw ConfigError(field, "give exactly one of {c0, c1}, {beta, lambda} or {stepsize}");
  }
  ClipPolicy policy;
  if (st) {
    const double gamma = f.number("stepsize");
    policy = guarded(f.at("stepsize"), [&] { return ClipPolicy::constant(gamma); });
  } else if (bl) {
    const double beta = f.number("beta");
    const double lambda = f.number("lambda");
    const auto cc = guarded(field, [&] { return from_beta_lambda(beta, lambda); });
    policy = guarded(field, [&] { return ClipPolicy(cc.c0, cc.c1, mode); });
  } else {
    const double c0 = f.number("c0");
    const double c1 = f.number("c1", 0.0);
    policy = guarded(field, [&] { return ClipPolicy(c0, c1, mode); });
  }
  f.finish();
  return policy;
}

AlgorithmConfig parse_algorithm(const json& j, const std::string& field) {
  Fields f(j, field);
  const std::string kind = f.text("kind");
  AlgorithmConfig out;
  if (kind == "clip_local_gdj") {
    ClipLocalGdjParams p;
    p.schedule = parse_local_schedule(f);
    p.inner_stepsize = schedule(f, "inner_stepsize");
    p.policy = parse_policy(f.raw("policy"), f.at("policy"));
    out = p;
  } else if (kind == "clerr") {
    ClerrParams p;
    p.inner_stepsize = schedule(f, "inner_stepsize");
    p.policy = parse_policy(f.raw("policy"), f.at("policy"));
    p.shuffle = shuffle(f, ShuffleMode::kReshuffle);
    p.per_client_permutation = f.flag("per_client_permutation", false);
    out = p;
  } else if (kind == "clipped_rr_cli") {
    ClippedRrCliParams p;
    p.client_stepsize = schedule(f, "client_stepsize");
    p.server_stepsize = schedule(f, "server_stepsize");
    p.policy = parse_policy(f.raw("policy"), f.at("policy"));
    p.cohort_size = f.count("cohort_size");
    p.batch_size = f.count("batch_size", 1);
    if (p.cohort_size == 0) throw ConfigError(f.at("cohort_size"), "must be at least 1");
    if (p.batch_size == 0) throw ConfigError(f.at("batch_size"), "must be at least 1");
    out = p;
  } else {
    const BaselineKind bk =
        guarded(f.at("kind"), [&] { return baseline_kind_from_string(kind); });
    BaselineParams p;
    const bool uses_policy = bk == BaselineKind::kCELGC || bk == BaselineKind::kGD;
    if (uses_policy) {
      p.policy = parse_policy(f.raw("policy"), f.at("policy"));
    } else {
      p.stepsize = schedule(f, "stepsize");
    }
    switch (bk) {
      case BaselineKind::kSO:
        p.shuffle = shuffle(f, ShuffleMode::kShuffleOnce);
        break;
      case BaselineKind::kCSO:
        p.shuffle = shuffle(f, ShuffleMode::kShuffleOnce);
        p.clip_level = f.number("clip_level");
        break;
      case BaselineKind::kNastya:
        p.shuffle = shuffle(f, ShuffleMode::kShuffleOnce);
        p.per_client_permutation = f.flag("per_client_permutation", false);
        p.server_stepsize = schedule(f, "server_stepsize");
        break;
      case BaselineKind::kCEFedAvgPP:
        p.cohort_size = f.count("cohort_size");
        [[fallthrough]];
      case BaselineKind::kCEFedAvg:
        p.server_stepsize = schedule(f, "server_stepsize", 1.0);
        p.clip_level = f.number("clip_level", std::numeric_limits<double>::infinity());
        [[fallthrough]];
      case BaselineKind::kLocalGD:
      case BaselineKind::kCELGC:
        p.local_steps = f.count("local_steps", 1);
        p.batch_size = f.count("batch_size", 0);
        if (p.local_steps == 0) throw ConfigError(f.at("local_steps"), "must be at least 1");
        break;
      case BaselineKind::kGD:
        break;
    }
    if (!(p.clip_level > 0.0)) throw ConfigError(f.at("clip_level"), "must be positive");
    out = BaselineConfig{bk, p};
  }
  f.finish();
  return out;
}

RunRecord run_algorithm(const AlgorithmConfig& algorithm, const Problem& p, const ParamVector& x0,
                        const RunOptions& options) {
  return std::visit(
      [&](const auto& a) -> RunRecord {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ClipLocalGdjParams>) {
          return run_clip_local_gdj(p, a, x0, options);
        } else if constexpr (std::is_same_v<T, ClerrParams>) {
          return run_clerr(p, a, x0, options);
        } else if constexpr (std::is_same_v<T, ClippedRrCliParams>) {
          return run_clipped_rr_cli(p, a, x0, options);
        } else {
          return run_baseline(a.kind, p, a.params, x0, options);
        }
      },
      algorithm);
}

std::unique_ptr<Problem> make_problem(const json& j, Seed default_seed,
                                      const std::filesystem::path& base_dir) {
  Fields f(j, "problem");
  const std::string kind = f.text("kind");
  std::unique_ptr<Problem> out;
  if (kind == "fourth_order") {
    FourthOrderOptions o;
    o.dim = f.count("dim");
    o.clients = f.count("clients", 1);
    o.components = f.count("components");
    o.shift_range = f.number("shift_range", 10.0);
    o.sort_by_norm = f.flag("sort_by_norm", false);
    o.seed = f.has("seed") ? f.count("seed") : default_seed;
    f.finish();
    out = guarded("problem", [&] {
      return std::make_unique<FourthOrderProblem>(FourthOrderProblem::sample(o));
    });
  } else if (kind == "quadratic") {
    QuadraticOptions o;
    o.clients = f.count("clients", 1);
    o.components = f.count("components", 1);
    o.center_spread = f.number("center_spread", 0.0);
    o.seed = f.has("seed") ? f.count("seed") : default_seed;
    if (f.has("curvature")) {
      const json& c = f.raw("curvature");
      if (!c.is_array() || c.empty()) throw ConfigError(f.at("curvature"), "expected a nonempty array");
      o.curvature.resize(static_cast<Eigen::Index>(c.size()));
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (!c[i].is_number()) throw ConfigError(f.at("curvature"), "expected numbers");
        o.curvature[static_cast<Eigen::Index>(i)] = c[i].get<double>();
      }
    } else {
      // Evenly spaced spectrum between strong_convexity and smoothness.
      const std::size_t d = f.count("dim");
      const double L = f.number("smoothness");
      const double mu = f.number("strong_convexity", L);
      if (d == 0) throw ConfigError(f.at("dim"), "must be at least 1");
      o.curvature.resize(static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i) {
        const double t = d == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(d - 1);
        o.curvature[static_cast<Eigen::Index>(i)] = mu + t * (L - mu);
      }
    }
    f.finish();
    out = guarded("problem", [&] {
      return std::make_unique<QuadraticProblem>(QuadraticProblem::sample(o));
    });
  } else if (kind == "logistic") {
    const bool from_file = f.has("path");
    if (from_file == f.has("synthetic")) {
      throw ConfigError("problem", "logistic problems need exactly one of path or synthetic");
    }
    const std::size_t clients = f.count("clients", 1);
    const double l2 = f.number("l2_reg", 0.0);
    LibsvmDataset data;
    if (from_file) {
      const std::string path = f.text("path");
      f.finish();
      data = load_libsvm(resolve(base_dir, path));
    } else {
      Fields s(f.raw("synthetic"), f.at("synthetic"));
      SyntheticDatasetOptions o;
      o.samples = s.count("samples", o.samples);
      o.dim = s.count("dim", o.dim);
      o.density = s.number("density", o.density);
      o.label_noise = s.number("label_noise", o.label_noise);
      o.seed = s.has("seed") ? s.count("seed") : default_seed;
      s.finish();
      f.finish();
      data = guarded(f.at("synthetic"), [&] { return synthetic_dataset(o); });
    }
    out = guarded("problem", [&] {
      return std::make_unique<LogisticProblem>(std::move(data), clients, l2);
    });
  } else {
    throw ConfigError(f.at("kind"), "unknown problem kind '" + kind +
                                        "' (expected fourth_order, quadratic or logistic)");
  }
  return out;
}

ParamVector make_x0(const json& j, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (j.is_number()) return ParamVector::Constant(d, j.get<double>());
  if (!j.is_array() || j.size() != dim) {
    throw ConfigError("x0", "expected a number or an array of " + std::to_string(dim) + " numbers");
  }
  ParamVector x(d);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!j[i].is_number()) throw ConfigError("x0", "expected numbers");
    x[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  if (!all_finite(x)) throw ConfigError("x0", "must be finite");
  return x;
}

RunConfig parse_run_config(const json& j) {
  Fields f(j, "");
  RunConfig c;
  c.problem = f.raw("problem");
  c.algorithm = f.raw("algorithm");
  if (f.has("x0")) c.x0 = f.raw("x0");
  c.epochs = f.count("epochs");
  c.seed = f.count("seed", 0);
  if (f.has("f_star")) {
    const json& v = f.raw("f_star");
    if (v.is_number()) {
      c.f_star = v.get<double>();
    } else if (!(v.is_string() && v.get<std::string>() == "solve")) {
      throw ConfigError("f_star", "expected a number or \"solve\"");
    }
  }
  c.divergence_threshold = f.number("divergence_threshold", 1e12);
  if (!(c.divergence_threshold > 0.0)) throw ConfigError("divergence_threshold", "must be positive");
  if (f.has("output")) c.output = f.text("output");

  if (f.has("grid")) {
    Fields g(f.raw("grid"), "grid");
    GridConfig grid;
    const json& axes = g.raw("axes");
    if (!axes.is_object() || axes.empty()) throw ConfigError(g.at("axes"), "expected a nonempty object");
    for (const auto& [name, values] : axes.items()) {
      const std::string field = g.at("axes") + "." + name;
      if (!values.is_array() || values.empty()) throw ConfigError(field, "expected a nonempty array");
      GridAxis axis{name, {}};
      for (const auto& v : values) {
        if (!v.is_number()) throw ConfigError(field, "expected numbers");
        axis.values.push_back(v.get<double>());
      }
      grid.spec.axes.push_back(std::move(axis));
    }
    if (g.has("seeds")) {
      const json& s = g.raw("seeds");
      if (!s.is_array() || s.empty()) throw ConfigError(g.at("seeds"), "expected a nonempty array");
      for (const auto& v : s) grid.spec.seeds.push_back(Fields::as_count(v, g.at("seeds")));
    } else {
      grid.spec.seeds = {c.seed};
    }
    grid.spec.primary_param = g.text("primary", "");
    if (g.has("selection")) {
      Fields s(g.raw("selection"), g.at("selection"));
      const std::string metric = s.text("metric", "mean_loss");
      grid.rule.metric = guarded(s.at("metric"), [&] { return selection_metric_from_string(metric); });
      grid.rule.window = s.number("window", 0.25);
      if (!(grid.rule.window > 0.0 && grid.rule.window <= 1.0)) {
        throw ConfigError(s.at("window"), "must lie in (0, 1]");
      }
      s.finish();
    }
    g.finish();
    for (const auto& cell : expand_grid(c.algorithm, grid.spec)) parse_algorithm(cell);
    c.grid = std::move(grid);
  } else {
    parse_algorithm(c.algorithm);
  }
  f.finish();

  // Problem-block validation that does not need data files.
  Fields pf(c.problem, "problem");
  const std::string kind = pf.text("kind");
  if (kind != "fourth_order" && kind != "quadratic" && kind != "logistic") {
    throw ConfigError("problem.kind", "unknown problem kind '" + kind + "'");
  }
  if (kind != "logistic" || !c.problem.contains("path")) make_problem(c.problem, c.seed);
  if (!c.x0.is_number() && !c.x0.is_array()) throw ConfigError("x0", "expected a number or an array");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  RunConfig c = parse_run_config(j);
  c.base_dir = path.parent_path();
  return c;
}

Instance make_instance(const RunConfig& config, Seed seed) {
  Instance inst;
  inst.problem = make_problem(config.problem, seed, config.base_dir);
  inst.x0 = make_x0(config.x0, inst.problem->dim());
  if (config.f_star) {
    inst.f_star = *config.f_star;
  } else {
    const auto cert = solve_fstar(*inst.problem, inst.x0, FStarOptions{});
    inst.f_star = cert.f_star;
    inst.fstar_grad_norm = cert.grad_norm_at_star;
  }
  return inst;
}

RunRecord run_config(const RunConfig& config, const Instance& instance, Seed seed,
                     const json* algorithm_override, bool keep_trajectory) {
  const json& block = algorithm_override ? *algorithm_override : config.algorithm;
  const AlgorithmConfig algorithm = parse_algorithm(block);
  RunOptions options;
  options.epochs = config.epochs;
  options.seed = seed;
  options.f_star = instance.f_star;
  options.divergence_threshold = config.divergence_threshold;
  options.keep_trajectory = keep_trajectory;
  return run_algorithm(algorithm, *instance.problem, instance.x0, options);
}

}  // namespace clipfl
