#include "clipfl/fourth_order.hpp"

#include "clipfl/errors.hpp"
#include "clipfl/rng.hpp"

#include <algorithm>
#include <numeric>

namespace clipfl {

FourthOrderProblem::FourthOrderProblem(Matrix shifts, std::size_t clients)
    : shifts_(std::move(shifts)), clients_(clients), components_(0) {
  if (clients_ == 0) throw UsageError("fourth-order problem needs at least one client");
  if (shifts_.rows() == 0) throw UsageError("fourth-order problem needs dim >= 1");
  const auto total = static_cast<std::size_t>(shifts_.cols());
  if (total == 0 || total % clients_ != 0) {
    throw UsageError("shift count " + std::to_string(total) + " is not a positive multiple of " +
                     std::to_string(clients_) + " clients");
  }
  if (!shifts_.allFinite()) throw InputError("shifts contain non-finite values");
  components_ = total / clients_;
}

FourthOrderProblem FourthOrderProblem::sample(const FourthOrderOptions& o) {
  if (o.dim == 0 || o.clients == 0 || o.components == 0) {
    throw UsageError("fourth-order problem needs dim, clients and components >= 1");
  }
  if (!(o.shift_range >= 0.0)) throw UsageError("shift_range must be nonnegative");
  const std::size_t total = o.clients * o.components;
  const auto d = static_cast<Eigen::Index>(o.dim);

  Matrix drawn(d, static_cast<Eigen::Index>(total));
  auto rng = CounterRng::derive(o.seed, StreamTag::kShifts);
  for (Eigen::Index i = 0; i < drawn.cols(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) drawn(k, i) = rng.uniform(-o.shift_range, o.shift_range);
  }
  if (!o.sort_by_norm) return FourthOrderProblem(std::move(drawn), o.clients);

  std::vector<double> norms(total);
  for (std::size_t i = 0; i < total; ++i) norms[i] = drawn.col(static_cast<Eigen::Index>(i)).norm();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
  Matrix sorted(d, static_cast<Eigen::Index>(total));
  for (std::size_t i = 0; i < total; ++i) {
    sorted.col(static_cast<Eigen::Index>(i)) = drawn.col(static_cast<Eigen::Index>(order[i]));
  }
  return FourthOrderProblem(std::move(sorted), o.clients);
}

double FourthOrderProblem::component_value(std::size_t m, std::size_t j,
                                           const ParamVector& x) const {
  const double s = (x - shift(m, j)).squaredNorm();
  return s * s;
}

void FourthOrderProblem::component_gradient(std::size_t m, std::size_t j, const ParamVector& x,
                                            ParamVector& out) const {
  out = x - shift(m, j);
  const double s = out.squaredNorm();
  out *= 4.0 * s;
}

void FourthOrderProblem::add_component_hessian(std::size_t m, std::size_t j, const ParamVector& x,
                                               double weight, Matrix& h) const {
  const ParamVector r = x - shift(m, j);
  h.diagonal().array() += weight * 4.0 * r.squaredNorm();
  h.noalias() += (weight * 8.0) * r * r.transpose();
}

}  // namespace clipfl
