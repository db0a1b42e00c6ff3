#pragma once

#include "clipfl/problem.hpp"

#include <vector>

namespace clipfl {

struct FourthOrderOptions {
  std::size_t dim = 1;
  std::size_t clients = 1;
  std::size_t components = 1;  ///< per client
  double shift_range = 10.0;   ///< shifts are uniform on [-range, range]^d
  bool sort_by_norm = false;   ///< heterogeneous shards: contiguous blocks in ||x_i|| order
  Seed seed = 0;
};

/// Sum of shifted quartics, f_{mj}(x) = ||x - x_{i(m,j)}||^4.
///
/// (L0, L1)-smooth but not L-smooth. Shifts are stored column-wise; client m
/// owns columns [m*N, (m+1)*N).
class FourthOrderProblem final : public Problem {
 public:
  /// Samples M*N shifts i.i.d. uniform on the box, optionally sorts them by
  /// Euclidean norm, and deals contiguous blocks to clients.
  static FourthOrderProblem sample(const FourthOrderOptions& options);

  /// Uses explicit shifts (one column per component, client-major order).
  FourthOrderProblem(Matrix shifts, std::size_t clients);

  std::size_t num_clients() const noexcept override { return clients_; }
  std::size_t num_components() const noexcept override { return components_; }
  std::size_t dim() const noexcept override { return static_cast<std::size_t>(shifts_.rows()); }
  std::string kind() const override { return "fourth_order"; }

  double component_value(std::size_t m, std::size_t j, const ParamVector& x) const override;
  void component_gradient(std::size_t m, std::size_t j, const ParamVector& x,
                          ParamVector& out) const override;

  bool has_hessian() const noexcept override { return true; }
  void add_component_hessian(std::size_t m, std::size_t j, const ParamVector& x, double weight,
                             Matrix& h) const override;

  const Matrix& shifts() const noexcept { return shifts_; }
  auto shift(std::size_t m, std::size_t j) const {
    return shifts_.col(static_cast<Eigen::Index>(m * components_ + j));
  }

 private:
  Matrix shifts_;
  std::size_t clients_;
  std::size_t components_;
};

}  // namespace clipfl
