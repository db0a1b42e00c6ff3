#pragma once

#include "clipfl/libsvm.hpp"
#include "clipfl/problem.hpp"

namespace clipfl {

/// L2-regularized logistic loss
///
///   f_{mj}(x) = log(1 + exp(-y <a, x>)) + (l2_reg / 2) ||x||^2
///
/// for sample (a, y) number m*N + j of the dataset. Clients own contiguous,
/// equally sized blocks; trailing samples that do not fill a block are
/// dropped and reported by dropped_samples().
class LogisticProblem final : public Problem {
 public:
  LogisticProblem(LibsvmDataset data, std::size_t clients, double l2_reg);

  std::size_t num_clients() const noexcept override { return clients_; }
  std::size_t num_components() const noexcept override { return components_; }
  std::size_t dim() const noexcept override { return data_.dim(); }
  std::string kind() const override { return "logistic"; }

  double component_value(std::size_t m, std::size_t j, const ParamVector& x) const override;
  void component_gradient(std::size_t m, std::size_t j, const ParamVector& x,
                          ParamVector& out) const override;

  bool has_hessian() const noexcept override { return true; }
  void add_component_hessian(std::size_t m, std::size_t j, const ParamVector& x, double weight,
                             Matrix& h) const override;

  double l2_reg() const noexcept { return l2_reg_; }
  std::size_t dropped_samples() const noexcept { return dropped_; }
  const LibsvmDataset& data() const noexcept { return data_; }

 private:
  double margin(Eigen::Index row, const ParamVector& x) const;

  LibsvmDataset data_;
  std::size_t clients_;
  std::size_t components_;
  std::size_t dropped_;
  double l2_reg_;
};

struct SyntheticDatasetOptions {
  std::size_t samples = 1000;
  std::size_t dim = 100;
  double density = 0.1;  ///< expected fraction of nonzero features per row
  double label_noise = 0.05;
  Seed seed = 0;
};

/// Sparse binary classification data labelled by a planted linear model with
/// random label flips. Every row has at least one nonzero.
LibsvmDataset synthetic_dataset(const SyntheticDatasetOptions& options);

}  // namespace clipfl
