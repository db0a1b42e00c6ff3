#pragma once

#include "clipfl/config.hpp"
#include "clipfl/harness.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace clipfl {

/// One method of a canned figure: its best-known configuration (the anchor)
/// and the full logarithmic search grid around it.
struct MethodSetup {
  std::string name;
  nlohmann::json algorithm;
  std::vector<GridAxis> axes;
};

struct FigureSetup {
  std::string id;
  nlohmann::json problem;
  nlohmann::json x0;
  std::size_t epochs = 0;
  std::vector<Seed> seeds;
  SelectionRule rule;
  std::vector<MethodSetup> methods;
  nlohmann::json notes;  ///< extra manifest fields
};

/// Ids: fig1, fig3a, fig3b, fig4, logreg. Throws UsageError otherwise.
FigureSetup figure_setup(const std::string& id);
std::vector<std::string> figure_ids();

/// 10^a, 10^(a+1), ..., 10^b for lo = 10^a, hi = 10^b.
std::vector<double> decade_grid(double lo, double hi);

/// Keeps every k-th point, k = round(1 / scale), on the lattice through
/// `anchor`; scale 0 keeps only the anchor. The anchor is always present.
std::vector<double> thin_grid(const std::vector<double>& full, double scale, double anchor);

struct ReproduceOptions {
  std::filesystem::path out;
  double grid_scale = 1.0;
  std::size_t workers = 1;
  std::vector<Seed> seeds;    ///< empty keeps the figure's seed list
  std::size_t epochs = 0;     ///< 0 keeps the figure's budget
  bool write_runs = true;     ///< per-run CSVs under runs/
};

struct MethodOutcome {
  std::string name;
  GridResult grid;
  std::vector<SeriesPoint> series;  ///< median over seeds of the winning config
};

struct ReproduceResult {
  nlohmann::json manifest;
  std::vector<MethodOutcome> methods;
};

/// Grid-searches every method, writes <out>/<method>.csv series and
/// <out>/manifest.json, and returns the outcomes.
ReproduceResult reproduce(const FigureSetup& figure, const ReproduceOptions& options);

}  // namespace clipfl
