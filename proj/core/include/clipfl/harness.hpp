#pragma once

#include "clipfl/run_record.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace clipfl {

/// One grid dimension. `name` is a dotted path into the algorithm config,
/// e.g. "policy.c0" or "inner_stepsize".
struct GridAxis {
  std::string name;
  std::vector<double> values;
};

struct GridSpec {
  std::vector<GridAxis> axes;
  std::vector<Seed> seeds;
  /// Tie-break parameter (smaller wins); empty uses the first axis.
  std::string primary_param;
};

enum class SelectionMetric { kMeanLoss, kMeanGradNorm, kFinalLoss };

std::string to_string(SelectionMetric metric);
SelectionMetric selection_metric_from_string(const std::string& name);

struct SelectionRule {
  SelectionMetric metric = SelectionMetric::kMeanLoss;
  /// Trailing fraction of rows scored, in (0, 1].
  double window = 0.25;
};

/// [begin, end) row indices of the trailing window: the last ceil(window * n)
/// rows, at least one. Throws UsageError unless 0 < window <= 1.
std::pair<std::size_t, std::size_t> selection_window(std::size_t n_rows, double window);

/// Score of one record under `rule`; +inf for a diverged record.
double score_record(const RunRecord& record, const SelectionRule& rule);

/// Sets a dotted path in `config` to `value`, creating objects along the way.
void set_dotted(nlohmann::json& config, const std::string& path, const nlohmann::json& value);
/// Throws UsageError when the path is absent.
const nlohmann::json& get_dotted(const nlohmann::json& config, const std::string& path);

/// Cartesian product of the axes applied to `base`, last axis fastest.
std::vector<nlohmann::json> expand_grid(const nlohmann::json& base, const GridSpec& spec);

using CellRunner = std::function<RunRecord(const nlohmann::json& config, Seed seed)>;

struct GridCell {
  nlohmann::json config;
  std::vector<RunRecord> records;  ///< one per seed, in spec.seeds order
  double score = 0.0;              ///< mean over seeds; +inf if any seed diverged
  std::size_t epochs_completed = 0;  ///< minimum over seeds
};

struct GridResult {
  std::vector<GridCell> cells;  ///< in expand_grid order
  std::size_t best = 0;
  bool all_diverged = false;
};

struct GridOptions {
  std::size_t workers = 1;
  /// Optional execution order over (cell, seed) task indices; must be a
  /// permutation. Results never depend on it.
  std::vector<std::size_t> execution_order;
};

/// Runs every (config, seed) pair and selects the best config. Diverged
/// configs rank below finished ones; among all-diverged grids more completed
/// epochs win. Ties prefer the smaller primary parameter, then the
/// lexicographically smaller canonical config.
GridResult run_grid(const GridSpec& spec, const nlohmann::json& base, const CellRunner& runner,
                    const SelectionRule& rule, const GridOptions& options = {});

/// Index of the best cell under the ranking used by run_grid.
std::size_t select_best(const std::vector<GridCell>& cells, const std::string& primary_param);

enum class Reducer { kMean, kMedian };

struct SeriesPoint {
  std::size_t epoch = 0;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

enum class SeriesMetric { kFResidual, kGradNorm };

/// Per-epoch reduction over seeds with min/max spread. Diverged records are
/// padded with +inf after their last row. Throws UsageError for empty input or
/// finished records of different lengths.
std::vector<SeriesPoint> aggregate_series(const std::vector<RunRecord>& records, Reducer reducer,
                                          SeriesMetric metric = SeriesMetric::kFResidual);

std::string series_csv(const std::vector<SeriesPoint>& series);

/// Writes runs/<grid-hash>/<config-hash>/<seed>.csv and
/// runs/<grid-hash>/summary.json under `root`. Returns the grid directory.
std::filesystem::path write_grid_results(const std::filesystem::path& root,
                                         const nlohmann::json& grid_identity,
                                         const GridResult& result, const SelectionRule& rule);

}  // namespace clipfl
