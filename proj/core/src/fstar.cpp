#include "clipfl/fstar.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace clipfl {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 80;

struct Point {
  ParamVector x;
  double f = 0.0;
  ParamVector g;
  double gnorm = 0.0;
};

Point evaluate(const Problem& p, ParamVector x) {
  Point pt;
  pt.f = eval_full_unchecked(p, x);
  pt.g.resize(x.size());
  ParamVector client(x.size()), scratch(x.size());
  grad_full_into(p, x, pt.g, client, scratch);
  pt.gnorm = pt.g.norm();
  pt.x = std::move(x);
  return pt;
}

// Newton direction, or an empty vector when the Hessian cannot supply a
// finite descent direction.
ParamVector newton_direction(const Problem& p, const Point& pt) {
  if (!p.has_hessian()) return {};
  const Matrix h = hessian_full(p, pt.x);
  Eigen::LDLT<Matrix> ldlt(h);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return {};
  ParamVector dir = ldlt.solve(-pt.g);
  if (!dir.allFinite() || !(pt.g.dot(dir) < 0.0)) return {};
  return dir;
}

// Armijo backtracking from unit step. Returns nullopt-like empty point when
// no sufficient decrease is found.
bool backtrack(const Problem& p, const Point& pt, const ParamVector& dir, double t0, Point& next) {
  const double slope = pt.g.dot(dir);
  double t = t0;
  for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
    ParamVector trial = pt.x + t * dir;
    if (!trial.allFinite()) continue;
    const double ft = eval_full_unchecked(p, trial);
    if (std::isfinite(ft) && ft <= pt.f + kArmijo * t * slope) {
      next = evaluate(p, std::move(trial));
      return true;
    }
  }
  return false;
}

FStarCertificate certificate(const Point& pt, std::size_t iterations) {
  return FStarCertificate{pt.x, pt.f, pt.gnorm, iterations};
}

}  // namespace

FStarCertificate solve_fstar(const Problem& p, const ParamVector& x0, const FStarOptions& options) {
  check_point(p, x0);
  if (!(options.abs_tol >= 0.0) || !(options.rel_tol >= 0.0) ||
      (options.abs_tol == 0.0 && options.rel_tol == 0.0)) {
    throw UsageError("solve_fstar needs a positive tolerance");
  }
  const auto tolerance = [&](double f) {
    return std::max(options.abs_tol, options.rel_tol * std::max(1.0, std::abs(f)));
  };

  Point pt = evaluate(p, x0);
  Point best = pt;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    if (pt.gnorm <= tolerance(pt.f)) return certificate(pt, it);

    Point next;
    bool moved = false;
    if (ParamVector dir = newton_direction(p, pt); dir.size() > 0) {
      // Near the optimum f stops resolving decreases before the gradient
      // does, so a full step that shrinks the gradient is taken first.
      Point full = evaluate(p, pt.x + dir);
      if (full.x.allFinite() && std::isfinite(full.f) &&
          (full.gnorm < pt.gnorm || full.f <= pt.f + kArmijo * pt.g.dot(dir))) {
        next = std::move(full);
        moved = true;
      } else {
        moved = backtrack(p, pt, dir, 0.5, next);
      }
    }
    if (!moved) {
      const ParamVector dir = -pt.g;
      moved = backtrack(p, pt, dir, 1.0, next);
    }
    if (!moved) break;
    pt = std::move(next);
    if (pt.gnorm < best.gnorm) best = pt;
  }
  if (pt.gnorm <= tolerance(pt.f)) return certificate(pt, options.max_iterations);
  throw ConvergenceError("f* solver stopped with ||grad f|| = " + std::to_string(best.gnorm) +
                             " above tolerance " + std::to_string(tolerance(best.f)),
                         certificate(best, options.max_iterations));
}

FStarCertificate solve_fstar(const Problem& p, const ParamVector& x0, double tol) {
  if (!(tol > 0.0)) throw UsageError("solve_fstar tolerance must be positive");
  return solve_fstar(p, x0, FStarOptions{tol, 0.0, 500});
}

}  // namespace clipfl
