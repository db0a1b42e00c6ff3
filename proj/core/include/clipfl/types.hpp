#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>

namespace clipfl {

/// Model parameters x in R^d.
using ParamVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using Seed = std::uint64_t;

/// True when every coordinate is finite.
inline bool all_finite(const ParamVector& x) { return x.allFinite(); }

}  // namespace clipfl
