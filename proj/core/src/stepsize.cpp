#include "clipfl/stepsize.hpp"

#include "clipfl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace clipfl {

std::string to_string(StepsizeMode mode) {
  switch (mode) {
    case StepsizeMode::kExactGradient: return "exact_gradient";
    case StepsizeMode::kPseudogradient: return "pseudogradient";
    case StepsizeMode::kConstant: return "constant";
  }
  return "unknown";
}

StepsizeMode stepsize_mode_from_string(const std::string& name) {
  if (name == "exact_gradient") return StepsizeMode::kExactGradient;
  if (name == "pseudogradient") return StepsizeMode::kPseudogradient;
  if (name == "constant") return StepsizeMode::kConstant;
  throw UsageError("unknown stepsize mode '" + name +
                   "' (expected exact_gradient, pseudogradient or constant)");
}

ClipPolicy::ClipPolicy(double c0, double c1, StepsizeMode mode) : c0_(c0), c1_(c1), mode_(mode) {
  if (!std::isfinite(c0) || !(c0 > 0.0)) throw UsageError("c0 must be positive and finite");
  if (!std::isfinite(c1) || !(c1 >= 0.0)) throw UsageError("c1 must be nonnegative and finite");
  if (mode == StepsizeMode::kConstant && c1 != 0.0) {
    throw UsageError("constant stepsize mode requires c1 = 0");
  }
}

ClipPolicy ClipPolicy::constant(double gamma) {
  if (!std::isfinite(gamma) || !(gamma > 0.0)) throw UsageError("stepsize must be positive");
  return ClipPolicy(1.0 / gamma, 0.0, StepsizeMode::kConstant);
}

double stepsize(const ClipPolicy& policy, double norm) {
  if (!std::isfinite(norm) || norm < 0.0) {
    throw InputError("stepsize needs a finite nonnegative norm, got " + std::to_string(norm));
  }
  if (policy.mode() == StepsizeMode::kConstant) return 1.0 / policy.c0();
  return 1.0 / (policy.c0() + policy.c1() * norm);
}

BetaLambda to_beta_lambda(double c0, double c1) {
  if (!(c0 > 0.0) || !std::isfinite(c0)) throw UsageError("c0 must be positive and finite");
  if (!(c1 > 0.0) || !std::isfinite(c1)) {
    throw UsageError("lambda = c0/c1 is undefined unless c1 > 0");
  }
  return BetaLambda{1.0 / (2.0 * c0), c0 / c1};
}

ClipConstants from_beta_lambda(double beta, double lambda) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("beta must be positive and finite");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw UsageError("lambda must be positive and finite");
  }
  const double c0 = 1.0 / (2.0 * beta);
  return ClipConstants{c0, c0 / lambda};
}

bool TheoryBounds::admits(double gamma, double rel_tol) const {
  return gamma >= gamma_lower * (1.0 - rel_tol) && gamma <= gamma_upper * (1.0 + rel_tol);
}

TheoryBounds theory_stepsize_ranges(double L0, double L1, const GradientNorms& norms,
                                    std::size_t max_local_steps, double zeta,
                                    std::size_t epochs) {
  if (!(L0 > 0.0) || !std::isfinite(L0)) throw InputError("L0 must be positive");
  if (!(L1 >= 0.0) || !std::isfinite(L1)) throw InputError("L1 must be nonnegative");
  if (max_local_steps < 1) throw InputError("H must be at least 1");
  if (epochs < 1) throw InputError("P must be at least 1");
  if (!(zeta > 0.0 && zeta <= 0.25)) throw InputError("zeta must lie in (0, 1/4]");
  for (double n : {norms.full, norms.max_client, norms.max_component}) {
    if (!(n >= 0.0) || !std::isfinite(n)) throw InputError("gradient norms must be finite, >= 0");
  }

  TheoryBounds b{};
  b.zeta = zeta;
  b.max_local_steps = max_local_steps;
  b.a_hat = L0 + L1 * norms.full;
  b.a_local = L0 + L1 * norms.max_client;
  b.a_tilde = L0 + L1 * norms.max_component;
  const double H = static_cast<double>(max_local_steps);
  const double c = std::sqrt(static_cast<double>(epochs));
  b.alpha_max = std::min(1.0 / (2.0 * H * b.a_local),
                         std::sqrt(b.a_hat / b.a_local) / (c * b.a_local));
  b.gamma_lower = zeta / b.a_hat;
  b.gamma_upper = 1.0 / (4.0 * b.a_hat);
  return b;
}

double pl_inner_stepsize_cap(double delta0, double A, std::size_t epochs) {
  if (!(delta0 >= 0.0) || !(A > 0.0) || epochs == 0) {
    throw InputError("PL cap needs delta0 >= 0, A > 0 and P >= 1");
  }
  return std::sqrt(delta0 / (A * static_cast<double>(epochs)));
}

}  // namespace clipfl
