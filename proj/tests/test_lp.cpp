#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fsdea/lp.hpp"
#include "fsdea/rng.hpp"

using namespace fsdea;

namespace {

struct RandomLp {
  LinearProgram lp;
  Eigen::MatrixXd A;  // constraint rows
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

// Vars in [0, 1], Le constraints with nonnegative rhs so x = 0 is feasible
// and the box keeps everything bounded.
RandomLp make_random_lp(uint64_t seed, int n = 6, int m = 8) {
  CounterRng rng(seed);
  RandomLp out;
  out.A.resize(m, n);
  out.b.resize(m);
  out.c.resize(n);
  for (int j = 0; j < n; ++j) {
    out.lp.add_variable("x" + std::to_string(j), 0.0, 1.0);
    out.c(j) = rng.uniform() * 2.0 - 0.5;
    out.lp.set_objective(j, out.c(j));
  }
  for (int i = 0; i < m; ++i) {
    const int row = out.lp.add_constraint("r" + std::to_string(i), Relation::Le,
                                          rng.uniform() * 2.0 + 0.1);
    out.b(i) = out.lp.constraints[row].rhs;
    for (int j = 0; j < n; ++j) {
      out.A(i, j) = rng.uniform() * 2.0 - 0.6;
      out.lp.add_coeff(row, j, out.A(i, j));
    }
  }
  return out;
}

// Exhaustive basic-solution enumeration over the hyperplanes {rows, x_j = 0,
// x_j = 1}: the optimum of a bounded feasible LP sits on one of them.
double vertex_enumeration_max(const RandomLp& r) {
  const int n = static_cast<int>(r.c.size());
  const int m = static_cast<int>(r.b.size());
  const int total = m + 2 * n;
  std::vector<int> pick(n);
  double best = -1e300;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  while (true) {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) {
      const int h = idx[k];
      if (h < m) {
        M.row(k) = r.A.row(h);
        rhs(k) = r.b(h);
      } else if (h < m + n) {
        M.row(k).setZero();
        M(k, h - m) = 1.0;
        rhs(k) = 0.0;
      } else {
        M.row(k).setZero();
        M(k, h - m - n) = 1.0;
        rhs(k) = 1.0;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(rhs);
      bool feasible = true;
      for (int j = 0; j < n && feasible; ++j)
        feasible = x(j) >= -1e-9 && x(j) <= 1.0 + 1e-9;
      for (int i = 0; i < m && feasible; ++i)
        feasible = r.A.row(i).dot(x) <= r.b(i) + 1e-9;
      if (feasible) best = std::max(best, r.c.dot(x));
    }
    int k = n - 1;
    while (k >= 0 && idx[k] == total - n + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

}  // namespace

TEST_CASE("single bounded variable") {
  LinearProgram lp;
  const int x = lp.add_variable("x");
  lp.set_objective(x, 1.0);
  const int r = lp.add_constraint("cap", Relation::Le, 3.0);
  lp.add_coeff(r, x, 1.0);
  const auto s = solve(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.values[x] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("degenerate optimum face is still optimal") {
  LinearProgram lp;
  const int x = lp.add_variable("x");
  const int y = lp.add_variable("y");
  lp.set_objective(x, 1.0);
  lp.set_objective(y, 1.0);
  const int r = lp.add_constraint("sum", Relation::Le, 1.0);
  lp.add_coeff(r, x, 1.0);
  lp.add_coeff(r, y, 1.0);
  const auto s = solve(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("free variable keeps its sign") {
  LinearProgram lp;
  const int x = lp.add_variable("x", -kInf, kInf);
  lp.set_objective(x, 1.0);
  const int r = lp.add_constraint("cap", Relation::Le, -2.0);
  lp.add_coeff(r, x, 1.0);
  const auto s = solve(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.values[x] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("equality and Ge constraints") {
  LinearProgram lp;
  const int x = lp.add_variable("x");
  const int y = lp.add_variable("y");
  lp.set_objective(x, 3.0);
  lp.set_objective(y, -1.0);
  int r = lp.add_constraint("fix", Relation::Eq, 2.0);
  lp.add_coeff(r, x, 1.0);
  lp.add_coeff(r, y, 1.0);
  r = lp.add_constraint("floor", Relation::Ge, 0.5);
  lp.add_coeff(r, y, 1.0);
  const auto s = solve(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.values[x] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(s.values[y] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("infeasible and unbounded detection") {
  {
    LinearProgram lp;
    const int x = lp.add_variable("x");
    lp.set_objective(x, 1.0);
    const int r = lp.add_constraint("neg", Relation::Le, -1.0);
    lp.add_coeff(r, x, 1.0);
    CHECK(solve(lp).status == LpStatus::Infeasible);
  }
  {
    LinearProgram lp;
    const int x = lp.add_variable("x");
    lp.set_objective(x, 1.0);
    const int r = lp.add_constraint("loose", Relation::Ge, 0.0);
    lp.add_coeff(r, x, 1.0);
    CHECK(solve(lp).status == LpStatus::Unbounded);
  }
}

TEST_CASE("random LPs match vertex enumeration") {
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    const RandomLp r = make_random_lp(seed);
    const auto s = solve(r.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    const double oracle = vertex_enumeration_max(r);
    CHECK(std::abs(s.objective - oracle) < 1e-8);
  }
}

TEST_CASE("row scaling leaves the optimum unchanged") {
  for (uint64_t seed = 21; seed <= 25; ++seed) {
    RandomLp r = make_random_lp(seed);
    const auto base = solve(r.lp);
    REQUIRE(base.status == LpStatus::Optimal);
    for (auto& c : r.lp.constraints) {
      for (auto& [var, v] : c.coeffs) v *= 7.5;
      c.rhs *= 7.5;
    }
    const auto scaled = solve(r.lp);
    REQUIRE(scaled.status == LpStatus::Optimal);
    CHECK(std::abs(base.objective - scaled.objective) < 1e-8);
  }
}

TEST_CASE("identical inputs give bit-identical solutions") {
  const RandomLp r = make_random_lp(7);
  const auto a = solve(r.lp);
  const auto b = solve(r.lp);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
  REQUIRE(a.values.size() == b.values.size());
  for (size_t j = 0; j < a.values.size(); ++j) CHECK(a.values[j] == b.values[j]);
}

TEST_CASE("weak duality on a small instance") {
  // max x + y s.t. 2x + y <= 4, x + 3y <= 6. Dual bound from y* = (0.4, 0.2):
  // objective <= 0.4*4 + 0.2*6 = 2.8 and the dual rows cover c exactly,
  // so the primal optimum must equal 2.8.
  LinearProgram lp;
  const int x = lp.add_variable("x");
  const int y = lp.add_variable("y");
  lp.set_objective(x, 1.0);
  lp.set_objective(y, 1.0);
  int r = lp.add_constraint("a", Relation::Le, 4.0);
  lp.add_coeff(r, x, 2.0);
  lp.add_coeff(r, y, 1.0);
  r = lp.add_constraint("b", Relation::Le, 6.0);
  lp.add_coeff(r, x, 1.0);
  lp.add_coeff(r, y, 3.0);
  const auto s = solve(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective <= 2.8 + 1e-9);
  CHECK(s.objective == doctest::Approx(2.8).epsilon(1e-10));
}

TEST_CASE("feasibility of the reported optimum") {
  const RandomLp r = make_random_lp(33);
  const auto s = solve(r.lp);
  REQUIRE(s.status == LpStatus::Optimal);
  Eigen::VectorXd x(r.c.size());
  for (int j = 0; j < r.c.size(); ++j) {
    x(j) = s.values[j];
    CHECK(x(j) >= -1e-8);
    CHECK(x(j) <= 1.0 + 1e-8);
  }
  for (int i = 0; i < r.b.size(); ++i) CHECK(r.A.row(i).dot(x) <= r.b(i) + 1e-8);
}
