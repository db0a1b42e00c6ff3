#include "clipfl/logistic.hpp"

#include "clipfl/errors.hpp"
#include "clipfl/rng.hpp"

#include <cmath>
#include <vector>

namespace clipfl {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// 1 / (1 + exp(-z))
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LogisticProblem::LogisticProblem(LibsvmDataset data, std::size_t clients, double l2_reg)
    : data_(std::move(data)), clients_(clients), components_(0), dropped_(0), l2_reg_(l2_reg) {
  if (clients_ == 0) throw UsageError("logistic problem needs at least one client");
  if (!(l2_reg_ >= 0.0) || !std::isfinite(l2_reg_)) {
    throw UsageError("l2_reg must be finite and nonnegative");
  }
  if (data_.dim() == 0) throw InputError("logistic dataset has no features");
  components_ = data_.samples() / clients_;
  if (components_ == 0) {
    throw InputError("dataset has " + std::to_string(data_.samples()) + " samples, fewer than " +
                     std::to_string(clients_) + " clients");
  }
  dropped_ = data_.samples() - components_ * clients_;
}

double LogisticProblem::margin(Eigen::Index row, const ParamVector& x) const {
  double dot = 0.0;
  for (SparseRows::InnerIterator it(data_.features, row); it; ++it) dot += it.value() * x[it.col()];
  return data_.labels[row] * dot;
}

double LogisticProblem::component_value(std::size_t m, std::size_t j, const ParamVector& x) const {
  const auto row = static_cast<Eigen::Index>(m * components_ + j);
  return softplus(-margin(row, x)) + 0.5 * l2_reg_ * x.squaredNorm();
}

void LogisticProblem::component_gradient(std::size_t m, std::size_t j, const ParamVector& x,
                                         ParamVector& out) const {
  const auto row = static_cast<Eigen::Index>(m * components_ + j);
  const double y = data_.labels[row];
  const double coef = -y * sigmoid(-margin(row, x));
  out = l2_reg_ * x;
  for (SparseRows::InnerIterator it(data_.features, row); it; ++it) out[it.col()] += coef * it.value();
}

void LogisticProblem::add_component_hessian(std::size_t m, std::size_t j, const ParamVector& x,
                                            double weight, Matrix& h) const {
  const auto row = static_cast<Eigen::Index>(m * components_ + j);
  const double s = sigmoid(margin(row, x));
  const double w = weight * s * (1.0 - s);
  for (SparseRows::InnerIterator a(data_.features, row); a; ++a) {
    for (SparseRows::InnerIterator b(data_.features, row); b; ++b) {
      h(a.col(), b.col()) += w * a.value() * b.value();
    }
  }
  h.diagonal().array() += weight * l2_reg_;
}

LibsvmDataset synthetic_dataset(const SyntheticDatasetOptions& o) {
  if (o.samples == 0 || o.dim == 0) throw UsageError("synthetic dataset needs samples and dim >= 1");
  if (!(o.density > 0.0 && o.density <= 1.0)) throw UsageError("density must lie in (0, 1]");
  if (!(o.label_noise >= 0.0 && o.label_noise < 0.5)) throw UsageError("label noise must lie in [0, 0.5)");

  auto model_rng = CounterRng::derive(o.seed, StreamTag::kSyntheticData, {0});
  ParamVector w(static_cast<Eigen::Index>(o.dim));
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = model_rng.normal();

  std::vector<Eigen::Triplet<double>> entries;
  LibsvmDataset data;
  data.labels.resize(static_cast<Eigen::Index>(o.samples));
  for (std::size_t i = 0; i < o.samples; ++i) {
    auto rng = CounterRng::derive(o.seed, StreamTag::kSyntheticData, {i + 1});
    double margin = 0.0;
    std::size_t nnz = 0;
    for (std::size_t k = 0; k < o.dim; ++k) {
      if (rng.uniform() >= o.density && !(k + 1 == o.dim && nnz == 0)) continue;
      const double v = rng.uniform(0.0, 1.0);
      entries.emplace_back(static_cast<int>(i), static_cast<int>(k), v);
      margin += v * w[static_cast<Eigen::Index>(k)];
      ++nnz;
    }
    double label = margin >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < o.label_noise) label = -label;
    data.labels[static_cast<Eigen::Index>(i)] = label;
  }
  data.features.resize(static_cast<Eigen::Index>(o.samples), static_cast<Eigen::Index>(o.dim));
  data.features.setFromTriplets(entries.begin(), entries.end());
  data.features.makeCompressed();
  return data;
}

}  // namespace clipfl
