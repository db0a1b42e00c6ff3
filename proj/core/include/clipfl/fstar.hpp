#pragma once

#include "clipfl/errors.hpp"
#include "clipfl/problem.hpp"

namespace clipfl {

/// Reference optimum with the gradient norm that certifies it.
struct FStarCertificate {
  ParamVector x_star;
  double f_star = 0.0;
  double grad_norm_at_star = 0.0;
  std::size_t iterations = 0;
};

struct FStarOptions {
  /// Converged once ||grad f|| <= max(abs_tol, rel_tol * max(1, |f|)).
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  std::size_t max_iterations = 500;
};

/// Raised when the solver hits its iteration cap; carries the best iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, FStarCertificate best)
      : Error(what, exit_code::kInternal), best_(std::move(best)) {}
  const FStarCertificate& best() const noexcept { return best_; }

 private:
  FStarCertificate best_;
};

/// Minimizes a convex problem by damped Newton with Armijo backtracking.
/// Iterations whose Hessian is unavailable, singular, or gives a non-descent
/// direction take a backtracking gradient step instead.
FStarCertificate solve_fstar(const Problem& p, const ParamVector& x0, const FStarOptions& options);

/// Absolute-tolerance form: iterate until ||grad f|| <= tol.
FStarCertificate solve_fstar(const Problem& p, const ParamVector& x0, double tol);

}  // namespace clipfl
