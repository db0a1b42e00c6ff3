#include "clipfl/quadratic.hpp"

#include "clipfl/errors.hpp"
#include "clipfl/rng.hpp"

namespace clipfl {

QuadraticProblem::QuadraticProblem(ParamVector curvature, Matrix centers, std::size_t clients)
    : curvature_(std::move(curvature)), centers_(std::move(centers)), clients_(clients),
      components_(0) {
  if (curvature_.size() == 0) throw UsageError("quadratic problem needs dim >= 1");
  if (!curvature_.allFinite() || (curvature_.array() < 0.0).any()) {
    throw InputError("quadratic curvature must be finite and nonnegative");
  }
  if (centers_.rows() != curvature_.size()) {
    throw UsageError("quadratic centers have " + std::to_string(centers_.rows()) +
                     " rows, expected " + std::to_string(curvature_.size()));
  }
  if (clients_ == 0) throw UsageError("quadratic problem needs at least one client");
  const auto total = static_cast<std::size_t>(centers_.cols());
  if (total == 0 || total % clients_ != 0) {
    throw UsageError("center count is not a positive multiple of the client count");
  }
  if (!centers_.allFinite()) throw InputError("quadratic centers contain non-finite values");
  components_ = total / clients_;
}

QuadraticProblem QuadraticProblem::sample(const QuadraticOptions& o) {
  if (o.clients == 0 || o.components == 0) {
    throw UsageError("quadratic problem needs clients and components >= 1");
  }
  const Eigen::Index d = o.curvature.size();
  Matrix centers = Matrix::Zero(d, static_cast<Eigen::Index>(o.clients * o.components));
  if (o.center_spread > 0.0) {
    auto rng = CounterRng::derive(o.seed, StreamTag::kCenters);
    for (Eigen::Index i = 0; i < centers.cols(); ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        centers(k, i) = rng.uniform(-o.center_spread, o.center_spread);
      }
    }
  }
  return QuadraticProblem(o.curvature, std::move(centers), o.clients);
}

double QuadraticProblem::component_value(std::size_t m, std::size_t j,
                                         const ParamVector& x) const {
  return 0.5 * (curvature_.array() * (x - center(m, j)).array().square()).sum();
}

void QuadraticProblem::component_gradient(std::size_t m, std::size_t j, const ParamVector& x,
                                          ParamVector& out) const {
  out = curvature_.cwiseProduct(x - center(m, j));
}

void QuadraticProblem::add_component_hessian(std::size_t, std::size_t, const ParamVector&,
                                             double weight, Matrix& h) const {
  h.diagonal() += weight * curvature_;
}

}  // namespace clipfl
