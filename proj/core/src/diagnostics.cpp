#include "clipfl/diagnostics.hpp"

#include "clipfl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace clipfl {

namespace {

constexpr std::size_t kSegmentPoints = 33;

double max_violation(std::span<const SmoothnessSample> samples, double L0, double L1) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) worst = std::max(worst, s.r - (L0 + L1 * s.g));
  return worst;
}

// Appends samples for one function given its gradients at x and y.
void push_sample(std::vector<SmoothnessSample>& out, const ParamVector& gx, const ParamVector& gy,
                 double dist) {
  out.push_back({gx.norm(), (gx - gy).norm() / dist});
}

}  // namespace

std::vector<ProbePair> make_probes(std::span<const ParamVector> anchors, std::size_t count,
                                   Seed seed, double s_min, double s_max) {
  if (anchors.empty()) throw UsageError("probe generation needs at least one anchor point");
  if (!(s_min > 0.0) || !(s_max >= s_min)) throw UsageError("probe radii need 0 < s_min <= s_max");
  const double log_lo = std::log(s_min);
  const double log_hi = std::log(s_max);
  std::vector<ProbePair> probes;
  probes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = CounterRng::derive(seed, StreamTag::kProbes, {i});
    const ParamVector& x = anchors[static_cast<std::size_t>(rng.below(anchors.size()))];
    ParamVector u(x.size());
    do {
      for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = rng.normal();
    } while (u.norm() == 0.0);
    u /= u.norm();
    const double s = std::exp(rng.uniform(log_lo, log_hi));
    probes.push_back({x, x + s * u});
  }
  return probes;
}

std::string to_string(ObjectiveLevel level) {
  switch (level) {
    case ObjectiveLevel::kFull: return "f";
    case ObjectiveLevel::kClient: return "f_m";
    case ObjectiveLevel::kComponent: return "f_mj";
    case ObjectiveLevel::kJoint: return "joint";
  }
  return "unknown";
}

ObjectiveLevel objective_level_from_string(const std::string& name) {
  if (name == "f") return ObjectiveLevel::kFull;
  if (name == "f_m") return ObjectiveLevel::kClient;
  if (name == "f_mj") return ObjectiveLevel::kComponent;
  if (name == "joint") return ObjectiveLevel::kJoint;
  throw UsageError("unknown objective level '" + name + "' (expected f, f_m, f_mj or joint)");
}

std::vector<SmoothnessSample> smoothness_samples(const Problem& p, std::span<const ProbePair> probes,
                                                 ObjectiveLevel level, std::size_t* skipped) {
  const bool full = level == ObjectiveLevel::kFull || level == ObjectiveLevel::kJoint;
  const bool client = level == ObjectiveLevel::kClient || level == ObjectiveLevel::kJoint;
  const bool component = level == ObjectiveLevel::kComponent || level == ObjectiveLevel::kJoint;
  const std::size_t M = p.num_clients();
  const std::size_t N = p.num_components();
  const auto d = static_cast<Eigen::Index>(p.dim());
  ParamVector gx(d), gy(d), buf(d), scratch(d);

  std::vector<SmoothnessSample> out;
  std::size_t skip = 0;
  for (const auto& pr : probes) {
    check_point(p, pr.x);
    check_point(p, pr.y);
    const double dist = (pr.x - pr.y).norm();
    if (dist == 0.0) {
      ++skip;
      continue;
    }
    if (full) {
      grad_full_into(p, pr.x, gx, buf, scratch);
      grad_full_into(p, pr.y, gy, buf, scratch);
      push_sample(out, gx, gy, dist);
    }
    for (std::size_t m = 0; m < M; ++m) {
      if (client) {
        grad_client_into(p, m, pr.x, gx, scratch);
        grad_client_into(p, m, pr.y, gy, scratch);
        push_sample(out, gx, gy, dist);
      }
      if (!component) continue;
      for (std::size_t j = 0; j < N; ++j) {
        p.component_gradient(m, j, pr.x, gx);
        p.component_gradient(m, j, pr.y, gy);
        push_sample(out, gx, gy, dist);
      }
    }
  }
  if (skipped) *skipped = skip;
  return out;
}

SmoothnessEstimate fit_L0L1(std::span<const SmoothnessSample> samples) {
  if (samples.empty()) throw InputError("no usable probe pairs for the (L0, L1) fit");

  std::vector<SmoothnessSample> pts(samples.begin(), samples.end());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.g < b.g || (a.g == b.g && a.r < b.r);
  });
  const double g_max = pts.back().g;

  // Upper hull, left to right.
  std::vector<SmoothnessSample> hull;
  for (const auto& q : pts) {
    if (!hull.empty() && hull.back().g == q.g) hull.pop_back();
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.g - a.g) * (q.r - a.r) - (b.r - a.r) * (q.g - a.g);
      if (cross < 0.0) break;
      hull.pop_back();
    }
    hull.push_back(q);
  }

  struct Candidate {
    double L0, L1;
  };
  std::vector<Candidate> candidates;
  double r_max = 0.0;
  for (const auto& q : pts) r_max = std::max(r_max, q.r);
  candidates.push_back({r_max, 0.0});

  bool origin_ok = true;
  double slope0 = 0.0;
  for (const auto& q : pts) {
    if (q.g > 0.0) {
      slope0 = std::max(slope0, q.r / q.g);
    } else if (q.r > 0.0) {
      origin_ok = false;
    }
  }
  if (origin_ok) candidates.push_back({0.0, slope0});

  for (std::size_t i = 1; i < hull.size(); ++i) {
    const auto& a = hull[i - 1];
    const auto& b = hull[i];
    const double slope = (b.r - a.r) / (b.g - a.g);
    if (!(slope > 0.0) || !std::isfinite(slope)) continue;
    const double L0 = a.r - slope * a.g;
    if (L0 < 0.0) continue;
    candidates.push_back({L0, slope});
  }

  const double scale = std::max(r_max, 1e-300);
  Candidate best{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double best_area = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (max_violation(pts, c.L0, c.L1) > 1e-9 * scale) continue;
    const double area = c.L0 + 0.5 * c.L1 * g_max;
    if (area < best_area || (area == best_area && (c.L1 < best.L1 || (c.L1 == best.L1 && c.L0 < best.L0)))) {
      best = c;
      best_area = area;
    }
  }

  // Absorb rounding so the estimate satisfies its own constraints exactly.
  double viol = max_violation(pts, best.L0, best.L1);
  while (viol > 0.0) {
    const double bumped = best.L0 + viol;
    best.L0 = bumped > best.L0 ? bumped : std::nextafter(best.L0, std::numeric_limits<double>::infinity());
    viol = max_violation(pts, best.L0, best.L1);
  }

  SmoothnessEstimate e;
  e.L0 = best.L0;
  e.L1 = best.L1;
  e.n_probes = pts.size();
  e.max_violation = viol;
  return e;
}

SmoothnessEstimate estimate_L0L1(const Problem& p, std::span<const ProbePair> probes,
                                 ObjectiveLevel level) {
  std::size_t skipped = 0;
  const auto samples = smoothness_samples(p, probes, level, &skipped);
  if (samples.empty()) throw InputError("every probe pair is coincident");
  SmoothnessEstimate e = fit_L0L1(samples);
  e.skipped = skipped;
  e.level = level;
  return e;
}

CheckReport check_descent_lemma(const Problem& p, std::span<const ProbePair> probes, double L0,
                                double L1, SmoothnessVariant variant) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  ParamVector gx(d), buf(d), scratch(d);
  CheckReport report;
  for (const auto& pr : probes) {
    check_point(p, pr.x);
    check_point(p, pr.y);
    const double fx = eval_full_unchecked(p, pr.x);
    const double fy = eval_full_unchecked(p, pr.y);
    grad_full_into(p, pr.x, gx, buf, scratch);
    const ParamVector v = pr.y - pr.x;
    const double dist = v.norm();
    double curvature = 0.5 * (L0 + L1 * gx.norm()) * dist * dist;
    if (variant == SmoothnessVariant::kSymmetric) curvature *= std::exp(L1 * dist);
    const double margin = fy - (fx + gx.dot(v) + curvature);
    const double slack = 1e-9 * std::max({1.0, std::abs(fx), std::abs(fy)});
    ++report.probes;
    report.worst_margin = std::max(report.worst_margin, margin);
    if (margin > slack) ++report.violations;
  }
  return report;
}

CheckReport check_gradient_bound(const Problem& p, std::span<const ParamVector> points, double L0,
                                 double L1, std::optional<double> f_star) {
  if (!f_star) throw UsageError("the gradient bound needs f* (run fstar first)");
  const auto d = static_cast<Eigen::Index>(p.dim());
  ParamVector g(d), buf(d), scratch(d);
  CheckReport report;
  for (const auto& x : points) {
    check_point(p, x);
    grad_full_into(p, x, g, buf, scratch);
    const double gn = g.norm();
    const double denom = 2.0 * (L0 + L1 * gn);
    const double lhs = gn == 0.0 ? 0.0 : gn * gn / denom;
    const double fx = eval_full_unchecked(p, x);
    const double margin = lhs - (fx - *f_star);
    ++report.probes;
    report.worst_margin = std::max(report.worst_margin, margin);
    if (margin > 1e-9 * std::max({1.0, std::abs(fx), std::abs(*f_star)})) ++report.violations;
  }
  return report;
}

CheckReport check_symmetric_smoothness(const Problem& p, std::span<const ProbePair> probes,
                                       double L0, double L1) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  ParamVector gx(d), gy(d), gu(d), u(d), buf(d), scratch(d);
  CheckReport report;
  for (const auto& pr : probes) {
    check_point(p, pr.x);
    check_point(p, pr.y);
    grad_full_into(p, pr.x, gx, buf, scratch);
    grad_full_into(p, pr.y, gy, buf, scratch);
    double sup = std::max(gx.norm(), gy.norm());
    for (std::size_t k = 1; k + 1 < kSegmentPoints; ++k) {
      const double tau = static_cast<double>(k) / static_cast<double>(kSegmentPoints - 1);
      u = pr.x + tau * (pr.y - pr.x);
      grad_full_into(p, u, gu, buf, scratch);
      sup = std::max(sup, gu.norm());
    }
    const double dist = (pr.x - pr.y).norm();
    const double lhs = (gx - gy).norm();
    const double rhs = (L0 + L1 * sup) * dist;
    const double margin = lhs - rhs;
    ++report.probes;
    report.worst_margin = std::max(report.worst_margin, margin);
    if (margin > 1e-9 * std::max(1.0, rhs)) ++report.violations;
  }
  return report;
}

PLEstimate estimate_pl(const Problem& p, std::span<const ParamVector> points, double f_star) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  ParamVector g(d), buf(d), scratch(d);
  PLEstimate e;
  e.f_star_used = f_star;
  e.mu = std::numeric_limits<double>::infinity();
  for (const auto& x : points) {
    check_point(p, x);
    const double gap = eval_full_unchecked(p, x) - f_star;
    if (!(gap > 1e-12)) continue;
    grad_full_into(p, x, g, buf, scratch);
    const double ratio = g.squaredNorm() / (2.0 * gap);
    ++e.used;
    if (ratio < e.mu) {
      e.mu = ratio;
      e.min_ratio_point = x;
    }
  }
  if (e.used == 0) throw InputError("every PL probe lies at the optimum");
  return e;
}

nlohmann::json to_json(const SmoothnessEstimate& e) {
  return {{"L0", e.L0},
          {"L1", e.L1},
          {"n_probes", e.n_probes},
          {"skipped", e.skipped},
          {"max_violation", e.max_violation},
          {"level", to_string(e.level)}};
}

nlohmann::json to_json(const CheckReport& r) {
  return {{"probes", r.probes}, {"violations", r.violations}, {"worst_margin", r.worst_margin}};
}

nlohmann::json to_json(const PLEstimate& e) {
  nlohmann::json point = nlohmann::json::array();
  for (Eigen::Index i = 0; i < e.min_ratio_point.size(); ++i) point.push_back(e.min_ratio_point[i]);
  return {{"mu", e.mu}, {"f_star_used", e.f_star_used}, {"used", e.used}, {"min_ratio_point", point}};
}

}  // namespace clipfl
