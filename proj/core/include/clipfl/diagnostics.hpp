#pragma once

#include "clipfl/problem.hpp"
#include "clipfl/rng.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clipfl {

struct ProbePair {
  ParamVector x;
  ParamVector y;
};

/// Pairs (x, x + s u): x drawn from `anchors`, u uniform on the unit sphere,
/// s log-uniform in [s_min, s_max]. Deterministic in `seed`.
std::vector<ProbePair> make_probes(std::span<const ParamVector> anchors, std::size_t count,
                                   Seed seed, double s_min = 1e-3, double s_max = 1.0);

/// Which functions contribute (g, r) samples to a fit.
enum class ObjectiveLevel {
  kFull,       ///< f
  kClient,     ///< every f_m
  kComponent,  ///< every f_mj
  kJoint,      ///< union of the three
};

std::string to_string(ObjectiveLevel level);
ObjectiveLevel objective_level_from_string(const std::string& name);

/// One probe of one function: g = ||grad h(x)||, r = ||grad h(x) - grad h(y)|| / ||x - y||.
struct SmoothnessSample {
  double g;
  double r;
};

struct SmoothnessEstimate {
  double L0 = 0.0;
  double L1 = 0.0;
  std::size_t n_probes = 0;  ///< samples used
  std::size_t skipped = 0;   ///< coincident pairs
  double max_violation = 0.0;
  ObjectiveLevel level = ObjectiveLevel::kJoint;
};

/// Coincident pairs are skipped and counted.
std::vector<SmoothnessSample> smoothness_samples(const Problem& p, std::span<const ProbePair> probes,
                                                 ObjectiveLevel level, std::size_t* skipped = nullptr);

/// Feasible (L0, L1) >= 0 with r <= L0 + L1 g for every sample that minimizes
/// the area L0 + L1 g_max / 2 under the envelope on [0, g_max]. Candidates are
/// the upper-hull edges and the two axis-aligned lines; ties prefer smaller L1.
/// Throws InputError for an empty sample set.
SmoothnessEstimate fit_L0L1(std::span<const SmoothnessSample> samples);

/// Throws InputError when every pair is coincident.
SmoothnessEstimate estimate_L0L1(const Problem& p, std::span<const ProbePair> probes,
                                 ObjectiveLevel level = ObjectiveLevel::kJoint);

struct CheckReport {
  std::size_t probes = 0;
  std::size_t violations = 0;
  /// Largest lhs - rhs seen; <= 0 when every probe holds with margin.
  double worst_margin = -std::numeric_limits<double>::infinity();
};

enum class SmoothnessVariant { kAsymmetric, kSymmetric };

/// f(y) <= f(x) + <grad f(x), y - x> + (L0 + L1 ||grad f(x)||)/2 * ||x - y||^2,
/// times exp(L1 ||x - y||) for the symmetric variant. Violations count beyond
/// a slack of 1e-9 max(1, |f(x)|, |f(y)|).
CheckReport check_descent_lemma(const Problem& p, std::span<const ProbePair> probes, double L0,
                                double L1, SmoothnessVariant variant = SmoothnessVariant::kAsymmetric);

/// ||grad f||^2 / (2 (L0 + L1 ||grad f||)) <= f(x) - f* + 1e-9 max(1, |f(x)|, |f*|).
/// Throws UsageError when f_star is missing.
CheckReport check_gradient_bound(const Problem& p, std::span<const ParamVector> points, double L0,
                                 double L1, std::optional<double> f_star);

/// ||grad f(x) - grad f(y)|| <= (L0 + L1 sup_[x,y] ||grad f||) ||x - y||, with
/// the supremum approximated on 33 evenly spaced points of the segment.
CheckReport check_symmetric_smoothness(const Problem& p, std::span<const ProbePair> probes,
                                       double L0, double L1);

struct PLEstimate {
  double mu = 0.0;
  double f_star_used = 0.0;
  ParamVector min_ratio_point;
  std::size_t used = 0;  ///< probes with f(x) - f* > 1e-12
};

/// mu = min ||grad f||^2 / (2 (f - f*)). Throws InputError when every point is
/// within 1e-12 of the optimum.
PLEstimate estimate_pl(const Problem& p, std::span<const ParamVector> points, double f_star);

nlohmann::json to_json(const SmoothnessEstimate& e);
nlohmann::json to_json(const CheckReport& r);
nlohmann::json to_json(const PLEstimate& e);

}  // namespace clipfl
