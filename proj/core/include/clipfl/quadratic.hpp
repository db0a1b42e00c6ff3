#pragma once

#include "clipfl/problem.hpp"

namespace clipfl {

struct QuadraticOptions {
  std::size_t clients = 1;
  std::size_t components = 1;  ///< per client
  ParamVector curvature;       ///< diagonal Hessian shared by every component, entries >= 0
  double center_spread = 0.0;  ///< centers uniform on [-spread, spread]^d
  Seed seed = 0;
};

/// Separable quadratic f_{mj}(x) = 1/2 sum_k h_k (x_k - c_{mj,k})^2.
///
/// L-smooth with L = max h and mu-strongly convex with mu = min h; the
/// minimizer of f is the mean of all centers.
class QuadraticProblem final : public Problem {
 public:
  static QuadraticProblem sample(const QuadraticOptions& options);

  /// Explicit centers, one column per component in client-major order.
  QuadraticProblem(ParamVector curvature, Matrix centers, std::size_t clients);

  std::size_t num_clients() const noexcept override { return clients_; }
  std::size_t num_components() const noexcept override { return components_; }
  std::size_t dim() const noexcept override { return static_cast<std::size_t>(curvature_.size()); }
  std::string kind() const override { return "quadratic"; }

  double component_value(std::size_t m, std::size_t j, const ParamVector& x) const override;
  void component_gradient(std::size_t m, std::size_t j, const ParamVector& x,
                          ParamVector& out) const override;

  bool has_hessian() const noexcept override { return true; }
  void add_component_hessian(std::size_t m, std::size_t j, const ParamVector& x, double weight,
                             Matrix& h) const override;

  const ParamVector& curvature() const noexcept { return curvature_; }
  const Matrix& centers() const noexcept { return centers_; }
  double smoothness() const { return curvature_.maxCoeff(); }
  double strong_convexity() const { return curvature_.minCoeff(); }
  ParamVector minimizer() const { return centers_.rowwise().mean(); }

 private:
  auto center(std::size_t m, std::size_t j) const {
    return centers_.col(static_cast<Eigen::Index>(m * components_ + j));
  }

  ParamVector curvature_;
  Matrix centers_;
  std::size_t clients_;
  std::size_t components_;
};

}  // namespace clipfl
