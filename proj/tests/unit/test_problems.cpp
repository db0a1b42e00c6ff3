#include "clipfl/errors.hpp"
#include "clipfl/fourth_order.hpp"
#include "clipfl/fstar.hpp"
#include "clipfl/libsvm.hpp"
#include "clipfl/logistic.hpp"
#include "clipfl/quadratic.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace clipfl;
using namespace clipfl::testing;

namespace {

FourthOrderProblem shifts_1d(std::initializer_list<double> values, std::size_t clients = 1) {
  Matrix s(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) s(0, i++) = v;
  return FourthOrderProblem(s, clients);
}

ParamVector vec(std::initializer_list<double> values) {
  ParamVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

LogisticProblem logistic_from(const std::string& text, std::size_t clients, double l2) {
  std::istringstream in(text);
  return LogisticProblem(read_libsvm(in), clients, l2);
}

// Central differences of a scalar function along every coordinate.
template <class F>
ParamVector fd_gradient(F f, const ParamVector& x) {
  const double h = 1e-5 * std::max(1.0, x.norm());
  ParamVector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    ParamVector a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("fourth-order component values") {
  const auto p = shifts_1d({1.0});
  CHECK(eval_component(p, 0, 0, vec({1.0})) == 0.0);
  CHECK(eval_component(p, 0, 0, vec({3.0})) == 16.0);
}

TEST_CASE("fourth-order component gradients") {
  CHECK(grad_component(shifts_1d({0.0}), 0, 0, vec({2.0}))(0) == 32.0);
  Matrix s(2, 1);
  s << 1.0, 1.0;
  const FourthOrderProblem p(s, 1);
  CHECK(grad_component(p, 0, 0, vec({1.0, 1.0})).norm() == 0.0);
}

TEST_CASE("client mean gradient of symmetric shifts matches finite differences") {
  const auto p = shifts_1d({-1.0, 1.0});
  const ParamVector x = vec({2.0});
  const ParamVector g = grad_client(p, 0, x);
  CHECK(g(0) == doctest::Approx(56.0).epsilon(1e-14));
  const ParamVector fd = fd_gradient([&](const ParamVector& y) { return eval_client(p, 0, y); }, x);
  CHECK(rel_err(g, fd) < 1e-6);
  CHECK(grad_full(p, vec({0.0})).norm() == 0.0);
}

TEST_CASE("single component problem: client and full gradients equal the component gradient") {
  const auto p = shifts_1d({3.5});
  const ParamVector x = vec({-1.25});
  const ParamVector g = grad_component(p, 0, 0, x);
  CHECK((grad_client(p, 0, x).array() == g.array()).all());
  CHECK((grad_full(p, x).array() == g.array()).all());
}

TEST_CASE("full gradient of a random three-client instance matches finite differences") {
  FourthOrderOptions o;
  o.dim = 4;
  o.clients = 3;
  o.components = 5;
  o.seed = 17;
  const auto p = FourthOrderProblem::sample(o);
  Gen gen(3);
  for (int k = 0; k < 10; ++k) {
    const ParamVector x = gen.vec(4, -5.0, 5.0);
    const ParamVector fd = fd_gradient([&](const ParamVector& y) { return eval_full(p, y); }, x);
    CHECK(rel_err(grad_full(p, x), fd) < 1e-6);
  }
}

TEST_CASE("oracle validation") {
  const auto p = shifts_1d({0.0, 1.0}, 2);
  CHECK_THROWS_AS(eval_component(p, 2, 0, vec({0.0})), UsageError);
  CHECK_THROWS_AS(eval_component(p, 0, 1, vec({0.0})), UsageError);
  CHECK_THROWS_AS(grad_full(p, vec({0.0, 1.0})), UsageError);
  CHECK_THROWS_AS(eval_full(p, vec({std::nan("")})), InputError);
  CHECK_THROWS_AS(grad_client(p, 0, vec({INFINITY})), InputError);
}

TEST_CASE("finite-sum structure holds on random probes") {
  for_all(20, 1, [](Gen& gen, std::size_t) {
    const auto p = random_fourth_order(gen);
    const ParamVector x = gen.vec(p.dim(), -3.0, 3.0);
    double full = 0.0;
    for (std::size_t m = 0; m < p.num_clients(); ++m) {
      double client = 0.0;
      for (std::size_t j = 0; j < p.num_components(); ++j) client += eval_component(p, m, j, x);
      client /= static_cast<double>(p.num_components());
      CHECK(rel_err(client, eval_client(p, m, x)) < 1e-12);
      full += client;
    }
    full /= static_cast<double>(p.num_clients());
    CHECK(rel_err(full, eval_full(p, x)) < 1e-12);
    return true;
  });
}

TEST_CASE("oracles are deterministic") {
  Gen gen(5);
  const auto p = random_fourth_order(gen);
  const ParamVector x = gen.vec(p.dim(), -2.0, 2.0);
  CHECK((grad_full(p, x).array() == grad_full(p, x).array()).all());
  CHECK(eval_full(p, x) == eval_full(p, x));
}

TEST_CASE("sorted shards have nondecreasing shift norms") {
  FourthOrderOptions o;
  o.dim = 3;
  o.clients = 5;
  o.components = 7;
  o.sort_by_norm = true;
  o.seed = 2;
  const auto p = FourthOrderProblem::sample(o);
  double prev_max = -1.0;
  for (std::size_t m = 0; m < 5; ++m) {
    double block_max = 0.0;
    for (std::size_t j = 0; j < 7; ++j) {
      const double n = p.shift(m, j).norm();
      CHECK(n >= prev_max);
      block_max = std::max(block_max, n);
    }
    prev_max = block_max;
  }
}

TEST_CASE("shifts lie in the sampling box") {
  FourthOrderOptions o;
  o.dim = 2;
  o.components = 50;
  o.shift_range = 10.0;
  const auto p = FourthOrderProblem::sample(o);
  CHECK(p.shifts().cwiseAbs().maxCoeff() <= 10.0);
}

TEST_CASE("logistic component values and gradients") {
  const auto p = logistic_from("1 1:0\n", 1, 0.0);
  CHECK(eval_component(p, 0, 0, vec({3.0})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const auto q = logistic_from("+1 1:0.5 3:2.0\n-1 2:1.0\n+1 1:-1 2:0.25 3:0.5\n-1 3:1\n", 2, 0.1);
  CHECK(q.num_clients() == 2);
  CHECK(q.num_components() == 2);
  Gen gen(8);
  for (int k = 0; k < 20; ++k) {
    const ParamVector x = gen.vec(3, -2.0, 2.0);
    for (std::size_t m = 0; m < 2; ++m) {
      for (std::size_t j = 0; j < 2; ++j) {
        const ParamVector fd =
            fd_gradient([&](const ParamVector& y) { return eval_component(q, m, j, y); }, x);
        CHECK(rel_err(grad_component(q, m, j, x), fd) < 1e-5);
      }
    }
  }
}

TEST_CASE("logistic partition drops the remainder") {
  const auto p = logistic_from("1 1:1\n-1 1:2\n1 1:3\n-1 1:4\n1 1:5\n", 2, 0.0);
  CHECK(p.num_components() == 2);
  CHECK(p.dropped_samples() == 1);
}

TEST_CASE("quadratic problem: minimizer is the center mean") {
  QuadraticOptions o;
  o.curvature = vec({1.0, 4.0});
  o.clients = 2;
  o.components = 3;
  o.center_spread = 2.0;
  const auto p = QuadraticProblem::sample(o);
  CHECK(grad_full(p, p.minimizer()).norm() < 1e-14);
  CHECK(p.smoothness() == 4.0);
  CHECK(p.strong_convexity() == 1.0);
}

TEST_CASE("gradient oracles match finite differences for every problem kind") {
  for_all(100, 2, [](Gen& gen, std::size_t i) {
    std::unique_ptr<Problem> p;
    if (i % 3 == 0) {
      p = std::make_unique<FourthOrderProblem>(random_fourth_order(gen));
    } else if (i % 3 == 1) {
      p = std::make_unique<QuadraticProblem>(random_quadratic(gen));
    } else {
      SyntheticDatasetOptions o;
      o.samples = 12;
      o.dim = gen.size(1, 6);
      o.density = 0.5;
      o.seed = gen.seed();
      p = std::make_unique<LogisticProblem>(synthetic_dataset(o), gen.size(1, 3), gen.real(0.0, 0.5));
    }
    const ParamVector x = gen.vec(p->dim(), -2.0, 2.0);
    const std::size_t m = gen.size(0, p->num_clients() - 1);
    const std::size_t j = gen.size(0, p->num_components() - 1);
    const ParamVector fd = fd_gradient([&](const ParamVector& y) { return eval_component(*p, m, j, y); }, x);
    const ParamVector g = grad_component(*p, m, j, x);
    const double err = (g - fd).norm() / std::max(1.0, g.norm());
    CHECK_MESSAGE(err < 1e-5, "case " << i << " kind " << p->kind());
    return err < 1e-5;
  });
}

TEST_CASE("grad_full is bitwise the fixed-order mean of client gradients") {
  for_all(20, 3, [](Gen& gen, std::size_t) {
    const auto p = random_fourth_order(gen);
    const ParamVector x = gen.vec(p.dim(), -3.0, 3.0);
    ParamVector sum = ParamVector::Zero(x.size());
    for (std::size_t m = 0; m < p.num_clients(); ++m) sum += grad_client(p, m, x);
    sum /= static_cast<double>(p.num_clients());
    const bool same = (sum.array() == grad_full(p, x).array()).all();
    CHECK(same);
    return same;
  });
}

TEST_CASE("f* of symmetric and single shifts") {
  const auto sym = shifts_1d({-1.0, 1.0});
  const auto c = solve_fstar(sym, vec({3.0}), 1e-12);
  CHECK(std::abs(c.x_star(0)) < 1e-8);
  CHECK(c.f_star == doctest::Approx(1.0).epsilon(1e-14));

  const auto single = shifts_1d({5.0});
  const auto s = solve_fstar(single, vec({0.0}), 1e-10);
  CHECK(s.x_star(0) == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(s.f_star < 1e-12);

  for (double a : {0.5, 2.0, 7.0}) {
    const auto p = shifts_1d({-a, a});
    CHECK(std::abs(solve_fstar(p, vec({a * 3.0}), FStarOptions{}).x_star(0)) < 1e-8);
  }
}

TEST_CASE("f* certificate on the larger fourth-order instances") {
  FourthOrderOptions o;
  o.dim = 1;
  o.components = 1000;
  const auto p = FourthOrderProblem::sample(o);
  const auto c = solve_fstar(p, vec({20.0}), FStarOptions{});
  CHECK(c.grad_norm_at_star <= 1e-10 * std::max(1.0, std::abs(c.f_star)));
  CHECK(grad_full(p, c.x_star).norm() == c.grad_norm_at_star);
}

TEST_CASE("f* of a regularized sparse logistic problem") {
  SyntheticDatasetOptions o;
  o.samples = 300;
  o.dim = 40;
  o.density = 0.1;
  const LogisticProblem p(synthetic_dataset(o), 1, 1e-3);
  const auto c = solve_fstar(p, ParamVector::Zero(40), 1e-10);
  CHECK(c.grad_norm_at_star <= 1e-10);
  CHECK(grad_full(p, c.x_star).norm() <= 1e-10);
}

TEST_CASE("f* solver rejects bad tolerances") {
  const auto p = shifts_1d({1.0});
  CHECK_THROWS_AS(solve_fstar(p, vec({0.0}), 0.0), UsageError);
}

TEST_CASE("libsvm parsing") {
  std::istringstream in("+1 1:0.5 3:2.0\n-1 2:1.0");
  const auto d = read_libsvm(in);
  CHECK(d.samples() == 2);
  CHECK(d.dim() == 3);
  CHECK(d.labels(0) == 1.0);
  CHECK(d.labels(1) == -1.0);
  CHECK(d.features.coeff(0, 2) == 2.0);

  std::istringstream dup("1 1:0.5 1:2.0\n");
  CHECK_THROWS_AS(read_libsvm(dup), ParseError);
  std::istringstream empty("\n\n");
  CHECK_THROWS_AS(read_libsvm(empty), InputError);
  std::istringstream bad("1 1:0.5\n-1 x:1\n");
  try {
    read_libsvm(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream zero("1 0:1\n");
  CHECK_THROWS_AS(read_libsvm(zero), ParseError);
  CHECK_THROWS_AS(load_libsvm("/nonexistent/file.svm"), IoError);
}

TEST_CASE("libsvm label mapping") {
  std::istringstream zero_one("0 1:1\n1 1:2\n");
  const auto d = read_libsvm(zero_one);
  CHECK(d.labels(0) == -1.0);
  CHECK(d.labels(1) == 1.0);
  std::istringstream three("0 1:1\n1 1:2\n2 1:3\n");
  CHECK_THROWS_AS(read_libsvm(three), ParseError);
}

TEST_CASE("libsvm parser agrees with a naive reference parser on random files") {
  Gen gen(11);
  std::ostringstream text;
  for (int line = 0; line < 100; ++line) {
    text << (gen.coin() ? "+1" : "-1");
    std::size_t idx = 0;
    const std::size_t nnz = gen.size(0, 6);
    for (std::size_t k = 0; k < nnz; ++k) {
      idx += gen.size(1, 4);
      text << ' ' << idx << ':' << gen.real(-5.0, 5.0);
    }
    text << '\n';
  }
  std::istringstream in(text.str());
  const auto parsed = read_libsvm(in);
  const auto ref = reference_libsvm(text.str());
  REQUIRE(parsed.samples() == ref.rows.size());
  REQUIRE(parsed.dim() == ref.dim);
  const Matrix dense = Matrix(parsed.features);
  bool same = true;
  for (std::size_t i = 0; i < ref.rows.size(); ++i) {
    same = same && parsed.labels(static_cast<Eigen::Index>(i)) == ref.labels[i];
    for (std::size_t k = 0; k < ref.dim; ++k) {
      same = same && dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) == ref.rows[i][k];
    }
  }
  CHECK(same);
}

TEST_CASE("synthetic datasets are deterministic and nonempty per row") {
  SyntheticDatasetOptions o;
  o.samples = 50;
  o.dim = 20;
  o.seed = 4;
  const auto a = synthetic_dataset(o);
  const auto b = synthetic_dataset(o);
  CHECK(Matrix(a.features) == Matrix(b.features));
  CHECK(a.labels == b.labels);
  for (Eigen::Index i = 0; i < a.features.rows(); ++i) CHECK(a.features.row(i).nonZeros() >= 1);
}
