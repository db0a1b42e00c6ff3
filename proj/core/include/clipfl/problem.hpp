#pragma once

#include "clipfl/types.hpp"

#include <cstddef>
#include <string>

namespace clipfl {

/// Distributed finite-sum objective
///
///   f(x) = (1/M) sum_m f_m(x),   f_m(x) = (1/N) sum_j f_{mj}(x).
///
/// Implementations provide the per-component oracles. The virtual oracles are
/// the unchecked hot path used by the runners: indices must be in range and
/// `x.size() == dim()`. Use the free functions below for validated access.
///
/// Oracles must be pure and deterministic; they may be called concurrently.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t num_clients() const noexcept = 0;
  virtual std::size_t num_components() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;
  virtual std::string kind() const = 0;

  virtual double component_value(std::size_t m, std::size_t j, const ParamVector& x) const = 0;

  /// Writes the gradient of f_{mj} at x into `out` (already sized dim()).
  virtual void component_gradient(std::size_t m, std::size_t j, const ParamVector& x,
                                  ParamVector& out) const = 0;

  virtual bool has_hessian() const noexcept { return false; }

  /// Adds weight * Hessian of f_{mj} at x into `h`. Throws UsageError when
  /// has_hessian() is false.
  virtual void add_component_hessian(std::size_t m, std::size_t j, const ParamVector& x,
                                     double weight, Matrix& h) const;
};

// Validated oracles. Index errors raise UsageError, non-finite x raises InputError.

double eval_component(const Problem& p, std::size_t m, std::size_t j, const ParamVector& x);
ParamVector grad_component(const Problem& p, std::size_t m, std::size_t j, const ParamVector& x);

double eval_client(const Problem& p, std::size_t m, const ParamVector& x);
double eval_full(const Problem& p, const ParamVector& x);

ParamVector grad_client(const Problem& p, std::size_t m, const ParamVector& x);
ParamVector grad_full(const Problem& p, const ParamVector& x);

/// Full Hessian of f. Requires has_hessian().
Matrix hessian_full(const Problem& p, const ParamVector& x);

/// Unchecked mean-gradient kernels with a fixed summation order (j ascending,
/// then m ascending). `scratch` must be sized dim(); it is clobbered.
void grad_client_into(const Problem& p, std::size_t m, const ParamVector& x, ParamVector& out,
                      ParamVector& scratch);
void grad_full_into(const Problem& p, const ParamVector& x, ParamVector& out, ParamVector& client,
                    ParamVector& scratch);
double eval_full_unchecked(const Problem& p, const ParamVector& x);

/// Throws unless x has the problem dimension and is finite.
void check_point(const Problem& p, const ParamVector& x);

}  // namespace clipfl
