#include "clipfl/problem.hpp"

#include "clipfl/errors.hpp"

namespace clipfl {

void Problem::add_component_hessian(std::size_t, std::size_t, const ParamVector&, double,
                                    Matrix&) const {
  throw UsageError("problem '" + kind() + "' does not provide a Hessian oracle");
}

void check_point(const Problem& p, const ParamVector& x) {
  if (static_cast<std::size_t>(x.size()) != p.dim()) {
    throw UsageError("point has dimension " + std::to_string(x.size()) + ", problem expects " +
                     std::to_string(p.dim()));
  }
  if (!all_finite(x)) throw InputError("point has non-finite coordinates");
}

namespace {

void check_client(const Problem& p, std::size_t m) {
  if (m >= p.num_clients()) {
    throw UsageError("client index " + std::to_string(m) + " out of range [0, " +
                     std::to_string(p.num_clients()) + ")");
  }
}

void check_component(const Problem& p, std::size_t m, std::size_t j) {
  check_client(p, m);
  if (j >= p.num_components()) {
    throw UsageError("component index " + std::to_string(j) + " out of range [0, " +
                     std::to_string(p.num_components()) + ")");
  }
}

double eval_client_unchecked(const Problem& p, std::size_t m, const ParamVector& x) {
  double acc = 0.0;
  for (std::size_t j = 0; j < p.num_components(); ++j) acc += p.component_value(m, j, x);
  return acc / static_cast<double>(p.num_components());
}

}  // namespace

void grad_client_into(const Problem& p, std::size_t m, const ParamVector& x, ParamVector& out,
                      ParamVector& scratch) {
  out.setZero();
  for (std::size_t j = 0; j < p.num_components(); ++j) {
    p.component_gradient(m, j, x, scratch);
    out += scratch;
  }
  out /= static_cast<double>(p.num_components());
}

void grad_full_into(const Problem& p, const ParamVector& x, ParamVector& out, ParamVector& client,
                    ParamVector& scratch) {
  out.setZero();
  for (std::size_t m = 0; m < p.num_clients(); ++m) {
    grad_client_into(p, m, x, client, scratch);
    out += client;
  }
  out /= static_cast<double>(p.num_clients());
}

double eval_full_unchecked(const Problem& p, const ParamVector& x) {
  double acc = 0.0;
  for (std::size_t m = 0; m < p.num_clients(); ++m) acc += eval_client_unchecked(p, m, x);
  return acc / static_cast<double>(p.num_clients());
}

double eval_component(const Problem& p, std::size_t m, std::size_t j, const ParamVector& x) {
  check_component(p, m, j);
  check_point(p, x);
  return p.component_value(m, j, x);
}

ParamVector grad_component(const Problem& p, std::size_t m, std::size_t j, const ParamVector& x) {
  check_component(p, m, j);
  check_point(p, x);
  ParamVector out(x.size());
  p.component_gradient(m, j, x, out);
  return out;
}

double eval_client(const Problem& p, std::size_t m, const ParamVector& x) {
  check_client(p, m);
  check_point(p, x);
  return eval_client_unchecked(p, m, x);
}

double eval_full(const Problem& p, const ParamVector& x) {
  check_point(p, x);
  return eval_full_unchecked(p, x);
}

ParamVector grad_client(const Problem& p, std::size_t m, const ParamVector& x) {
  check_client(p, m);
  check_point(p, x);
  ParamVector out(x.size()), scratch(x.size());
  grad_client_into(p, m, x, out, scratch);
  return out;
}

ParamVector grad_full(const Problem& p, const ParamVector& x) {
  check_point(p, x);
  ParamVector out(x.size()), client(x.size()), scratch(x.size());
  grad_full_into(p, x, out, client, scratch);
  return out;
}

Matrix hessian_full(const Problem& p, const ParamVector& x) {
  check_point(p, x);
  if (!p.has_hessian()) {
    throw UsageError("problem '" + p.kind() + "' does not provide a Hessian oracle");
  }
  const auto d = static_cast<Eigen::Index>(p.dim());
  Matrix h = Matrix::Zero(d, d);
  const double weight =
      1.0 / (static_cast<double>(p.num_clients()) * static_cast<double>(p.num_components()));
  for (std::size_t m = 0; m < p.num_clients(); ++m) {
    for (std::size_t j = 0; j < p.num_components(); ++j) {
      p.add_component_hessian(m, j, x, weight, h);
    }
  }
  return h;
}

}  // namespace clipfl
