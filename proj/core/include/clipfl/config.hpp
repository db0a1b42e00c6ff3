#pragma once

#include "clipfl/algorithms.hpp"
#include "clipfl/baselines.hpp"
#include "clipfl/harness.hpp"
#include "clipfl/problem.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <variant>

namespace clipfl {

struct BaselineConfig {
  BaselineKind kind;
  BaselineParams params;
};

using AlgorithmConfig =
    std::variant<ClipLocalGdjParams, ClerrParams, ClippedRrCliParams, BaselineConfig>;

/// Parses an algorithm block. `field` prefixes error paths. Throws ConfigError.
AlgorithmConfig parse_algorithm(const nlohmann::json& j, const std::string& field = "algorithm");

/// Policy block: {c0, c1[, mode]}, {beta, lambda[, mode]} or {stepsize}.
ClipPolicy parse_policy(const nlohmann::json& j, const std::string& field);

RunRecord run_algorithm(const AlgorithmConfig& algorithm, const Problem& p, const ParamVector& x0,
                        const RunOptions& options);

/// Problem block; `default_seed` is used when the block has no seed.
std::unique_ptr<Problem> make_problem(const nlohmann::json& j, Seed default_seed,
                                      const std::filesystem::path& base_dir = {});

/// A number fills every coordinate; an array must have `dim` entries.
ParamVector make_x0(const nlohmann::json& j, std::size_t dim);

struct GridConfig {
  GridSpec spec;
  SelectionRule rule;
};

struct RunConfig {
  nlohmann::json problem;
  nlohmann::json algorithm;
  nlohmann::json x0 = 1.0;
  std::size_t epochs = 1;
  Seed seed = 0;
  /// Unset: solve for f* with the Newton routine.
  std::optional<double> f_star;
  double divergence_threshold = 1e12;
  std::optional<std::string> output;
  std::optional<GridConfig> grid;
  std::filesystem::path base_dir;  ///< resolves relative dataset paths
};

/// Validates the whole file before any compute; unknown keys are rejected.
RunConfig parse_run_config(const nlohmann::json& j);

/// Throws IoError when unreadable and ConfigError on malformed JSON.
RunConfig load_run_config(const std::filesystem::path& path);

/// A problem instance for one seed with its start point and f*.
struct Instance {
  std::unique_ptr<Problem> problem;
  ParamVector x0;
  double f_star = 0.0;
  double fstar_grad_norm = 0.0;
};

Instance make_instance(const RunConfig& config, Seed seed);

/// Runs the configured algorithm (or `algorithm_override`) for one seed.
RunRecord run_config(const RunConfig& config, const Instance& instance, Seed seed,
                     const nlohmann::json* algorithm_override = nullptr,
                     bool keep_trajectory = false);

}  // namespace clipfl
