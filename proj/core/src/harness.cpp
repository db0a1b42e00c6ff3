#include "clipfl/harness.hpp"

#include "clipfl/errors.hpp"
#include "clipfl/io.hpp"
#include "clipfl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace clipfl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json::json_pointer dotted_pointer(const std::string& path) {
  if (path.empty()) throw UsageError("empty grid parameter name");
  std::string ptr;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("malformed parameter path '" + path + "'");
    ptr += '/';
    ptr += part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return nlohmann::json::json_pointer(ptr);
}

double primary_value(const nlohmann::json& config, const std::string& primary) {
  if (primary.empty()) return 0.0;
  const auto ptr = dotted_pointer(primary);
  if (!config.contains(ptr) || !config.at(ptr).is_number()) return 0.0;
  return config.at(ptr).get<double>();
}

}  // namespace

std::string to_string(SelectionMetric metric) {
  switch (metric) {
    case SelectionMetric::kMeanLoss: return "mean_loss";
    case SelectionMetric::kMeanGradNorm: return "mean_grad_norm";
    case SelectionMetric::kFinalLoss: return "final_loss";
  }
  return "unknown";
}

SelectionMetric selection_metric_from_string(const std::string& name) {
  if (name == "mean_loss") return SelectionMetric::kMeanLoss;
  if (name == "mean_grad_norm") return SelectionMetric::kMeanGradNorm;
  if (name == "final_loss") return SelectionMetric::kFinalLoss;
  throw UsageError("unknown selection metric '" + name +
                   "' (expected mean_loss, mean_grad_norm or final_loss)");
}

std::pair<std::size_t, std::size_t> selection_window(std::size_t n_rows, double window) {
  if (!(window > 0.0 && window <= 1.0)) throw UsageError("selection window must lie in (0, 1]");
  auto k = static_cast<std::size_t>(std::ceil(window * static_cast<double>(n_rows)));
  k = std::clamp<std::size_t>(k, n_rows == 0 ? 0 : 1, n_rows);
  return {n_rows - k, n_rows};
}

double score_record(const RunRecord& record, const SelectionRule& rule) {
  if (record.diverged() || record.rows.empty()) return kInf;
  if (rule.metric == SelectionMetric::kFinalLoss) return record.rows.back().f_residual;
  const auto [begin, end] = selection_window(record.rows.size(), rule.window);
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    sum += rule.metric == SelectionMetric::kMeanLoss ? record.rows[i].f_residual
                                                     : record.rows[i].grad_norm;
  }
  return sum / static_cast<double>(end - begin);
}

void set_dotted(nlohmann::json& config, const std::string& path, const nlohmann::json& value) {
  config[dotted_pointer(path)] = value;
}

const nlohmann::json& get_dotted(const nlohmann::json& config, const std::string& path) {
  const auto ptr = dotted_pointer(path);
  if (!config.contains(ptr)) throw UsageError("config has no parameter '" + path + "'");
  return config.at(ptr);
}

std::vector<nlohmann::json> expand_grid(const nlohmann::json& base, const GridSpec& spec) {
  std::vector<nlohmann::json> out{base};
  for (const auto& axis : spec.axes) {
    if (axis.values.empty()) throw UsageError("grid axis '" + axis.name + "' has no values");
    std::vector<nlohmann::json> next;
    next.reserve(out.size() * axis.values.size());
    for (const auto& cfg : out) {
      for (double v : axis.values) {
        nlohmann::json c = cfg;
        set_dotted(c, axis.name, v);
        next.push_back(std::move(c));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::size_t select_best(const std::vector<GridCell>& cells, const std::string& primary_param) {
  if (cells.empty()) throw UsageError("grid has no cells");
  const auto better = [&](const GridCell& a, const GridCell& b) {
    const bool a_ok = std::isfinite(a.score);
    const bool b_ok = std::isfinite(b.score);
    if (a_ok != b_ok) return a_ok;
    if (a_ok && a.score != b.score) return a.score < b.score;
    if (!a_ok && a.epochs_completed != b.epochs_completed) {
      return a.epochs_completed > b.epochs_completed;
    }
    const double pa = primary_value(a.config, primary_param);
    const double pb = primary_value(b.config, primary_param);
    if (pa != pb) return pa < pb;
    return canonical_json(a.config) < canonical_json(b.config);
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (better(cells[i], cells[best])) best = i;
  }
  return best;
}

GridResult run_grid(const GridSpec& spec, const nlohmann::json& base, const CellRunner& runner,
                    const SelectionRule& rule, const GridOptions& options) {
  if (spec.seeds.empty()) throw UsageError("grid needs at least one seed");
  selection_window(1, rule.window);

  GridResult result;
  for (auto& cfg : expand_grid(base, spec)) {
    GridCell cell;
    cell.config = std::move(cfg);
    cell.records.resize(spec.seeds.size());
    result.cells.push_back(std::move(cell));
  }

  const std::size_t n_seeds = spec.seeds.size();
  const std::size_t n_tasks = result.cells.size() * n_seeds;
  std::vector<std::size_t> order = options.execution_order;
  if (order.empty()) {
    order.resize(n_tasks);
    for (std::size_t i = 0; i < n_tasks; ++i) order[i] = i;
  } else if (order.size() != n_tasks || !is_permutation(order)) {
    throw UsageError("execution order must be a permutation of the grid tasks");
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n_tasks) return;
      const std::size_t task = order[k];
      GridCell& cell = result.cells[task / n_seeds];
      try {
        cell.records[task % n_seeds] = runner(cell.config, spec.seeds[task % n_seeds]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_tasks);
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(n_tasks, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  bool any_finite = false;
  for (auto& cell : result.cells) {
    double sum = 0.0;
    std::size_t completed = std::numeric_limits<std::size_t>::max();
    for (const auto& rec : cell.records) {
      sum += score_record(rec, rule);
      completed = std::min(completed, rec.epochs_completed());
    }
    cell.score = sum / static_cast<double>(cell.records.size());
    if (std::isnan(cell.score)) cell.score = kInf;
    cell.epochs_completed = completed;
    any_finite = any_finite || std::isfinite(cell.score);
  }
  const std::string primary =
      spec.primary_param.empty() && !spec.axes.empty() ? spec.axes.front().name : spec.primary_param;
  result.best = select_best(result.cells, primary);
  result.all_diverged = !any_finite;
  return result;
}

std::vector<SeriesPoint> aggregate_series(const std::vector<RunRecord>& records, Reducer reducer,
                                          SeriesMetric metric) {
  if (records.empty()) throw UsageError("aggregate_series needs at least one record");
  std::size_t length = 0;
  for (const auto& r : records) length = std::max(length, r.rows.size());
  for (const auto& r : records) {
    if (!r.diverged() && r.rows.size() != length) {
      throw UsageError("records to aggregate must share their epoch structure");
    }
  }

  std::vector<SeriesPoint> out;
  out.reserve(length);
  std::vector<double> values(records.size());
  for (std::size_t i = 0; i < length; ++i) {
    std::size_t epoch = i;
    for (std::size_t s = 0; s < records.size(); ++s) {
      const auto& rows = records[s].rows;
      if (i < rows.size()) {
        values[s] = metric == SeriesMetric::kFResidual ? rows[i].f_residual : rows[i].grad_norm;
        epoch = rows[i].epoch;
      } else {
        values[s] = kInf;
      }
    }
    SeriesPoint pt;
    pt.epoch = epoch;
    pt.lo = *std::min_element(values.begin(), values.end());
    pt.hi = *std::max_element(values.begin(), values.end());
    if (reducer == Reducer::kMean) {
      double sum = 0.0;
      for (double v : values) sum += v;
      pt.value = sum / static_cast<double>(values.size());
    } else {
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      pt.value = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }
    out.push_back(pt);
  }
  return out;
}

std::string series_csv(const std::vector<SeriesPoint>& series) {
  std::string out = "epoch,value,lo,hi\n";
  for (const auto& pt : series) {
    out += std::to_string(pt.epoch) + ',' + format_shortest(pt.value) + ',' +
           format_shortest(pt.lo) + ',' + format_shortest(pt.hi) + '\n';
  }
  return out;
}

std::filesystem::path write_grid_results(const std::filesystem::path& root,
                                         const nlohmann::json& grid_identity,
                                         const GridResult& result, const SelectionRule& rule) {
  const auto dir = root / "runs" / json_hash(grid_identity);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : result.cells) {
    const std::string hash = json_hash(cell.config);
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& rec : cell.records) {
      write_file(dir / hash / (std::to_string(rec.seed) + ".csv"), record_csv(rec));
      seeds.push_back({{"seed", rec.seed},
                       {"status", to_string(rec.status)},
                       {"score", score_record(rec, rule)},
                       {"epochs_completed", rec.epochs_completed()}});
    }
    cells.push_back({{"config_hash", hash},
                     {"config", cell.config},
                     {"score", cell.score},
                     {"runs", seeds}});
  }
  const auto& best = result.cells.at(result.best);
  nlohmann::json summary{{"grid", grid_identity},
                         {"selection", {{"metric", to_string(rule.metric)}, {"window", rule.window}}},
                         {"best_config", best.config},
                         {"best_config_hash", json_hash(best.config)},
                         {"best_score", best.score},
                         {"all_diverged", result.all_diverged},
                         {"cells", cells}};
  write_file(dir / "summary.json", canonical_json(summary, 2) + "\n");
  return dir;
}

}  // namespace clipfl
