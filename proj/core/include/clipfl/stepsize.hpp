#pragma once

#include <cstddef>
#include <string>

namespace clipfl {

/// Which norm feeds the smoothed-clipping rule.
enum class StepsizeMode {
  kExactGradient,   ///< ||grad f(x)|| at the start of the outer step (one extra full gradient)
  kPseudogradient,  ///< ||g|| of the pseudogradient, once it is available
  kConstant,        ///< 1 / c0, no norm needed
};

std::string to_string(StepsizeMode mode);
StepsizeMode stepsize_mode_from_string(const std::string& name);

/// Smoothed clipping gamma = 1 / (c0 + c1 * norm).
class ClipPolicy {
 public:
  ClipPolicy() = default;
  /// Throws UsageError unless c0 > 0, c1 >= 0 (both finite) and constant mode has c1 == 0.
  ClipPolicy(double c0, double c1, StepsizeMode mode);

  /// Constant stepsize `gamma`, i.e. c0 = 1 / gamma.
  static ClipPolicy constant(double gamma);

  double c0() const noexcept { return c0_; }
  double c1() const noexcept { return c1_; }
  StepsizeMode mode() const noexcept { return mode_; }

  bool uses_exact_gradient() const noexcept { return mode_ == StepsizeMode::kExactGradient; }
  bool uses_pseudogradient() const noexcept { return mode_ == StepsizeMode::kPseudogradient; }

  friend bool operator==(const ClipPolicy&, const ClipPolicy&) = default;

 private:
  double c0_ = 1.0;
  double c1_ = 0.0;
  StepsizeMode mode_ = StepsizeMode::kPseudogradient;
};

/// 1 / (c0 + c1 * norm); 1 / c0 in constant mode. Result lies in (0, 1/c0].
/// Throws InputError for a negative or non-finite norm.
double stepsize(const ClipPolicy& policy, double norm);

/// Stepsize/clip-level view of (c0, c1): beta = 1/(2 c0), lambda = c0/c1.
struct BetaLambda {
  double beta;
  double lambda;
};

struct ClipConstants {
  double c0;
  double c1;
};

/// Throws UsageError when c0 <= 0 or c1 <= 0 (lambda is undefined for c1 = 0).
BetaLambda to_beta_lambda(double c0, double c1);
ClipConstants from_beta_lambda(double beta, double lambda);

/// Gradient norms at the current server point.
struct GradientNorms {
  double full;           ///< ||grad f||
  double max_client;     ///< max_m ||grad f_m||
  double max_component;  ///< max_{m,j} ||grad f_mj||
};

/// Stepsize ranges under which the nonconvex guarantees hold.
struct TheoryBounds {
  double zeta;
  double a_hat;    ///< L0 + L1 ||grad f||
  double a_local;  ///< L0 + L1 max_m ||grad f_m||
  double a_tilde;  ///< L0 + L1 max_{m,j} ||grad f_mj||
  std::size_t max_local_steps;
  double alpha_max;     ///< inner stepsize cap min(1/(2 H a), sqrt(a_hat/a) / (sqrt(P) a))
  double gamma_lower;   ///< zeta / a_hat
  double gamma_upper;   ///< 1 / (4 a_hat)

  /// True when gamma lies in [gamma_lower, gamma_upper] up to `rel_tol`.
  bool admits(double gamma, double rel_tol = 1e-12) const;
};

/// Throws InputError unless L0 > 0, L1 >= 0, H >= 1, P >= 1 and 0 < zeta <= 1/4.
TheoryBounds theory_stepsize_ranges(double L0, double L1, const GradientNorms& norms,
                                    std::size_t max_local_steps, double zeta,
                                    std::size_t epochs);

/// Inner stepsize cap sqrt(delta0 / (A P)) used by the PL guarantees. `A` is an
/// analysis constant the caller must supply.
double pl_inner_stepsize_cap(double delta0, double A, std::size_t epochs);

}  // namespace clipfl
