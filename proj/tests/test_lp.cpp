#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gridess/branch_bound.hpp"
#include "gridess/linear_model.hpp"
#include "gridess/lp_format.hpp"
#include "gridess/simplex.hpp"

using namespace gridess;

namespace {

LinearModel random_box_lp(std::mt19937_64& rng, int n, int m) {
  LinearModel model;
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  for (int v = 0; v < n; ++v) model.add_var(0.0, pos(rng), coef(rng));
  for (int r = 0; r < m; ++r) {
    std::vector<RowEntry> row;
    for (int v = 0; v < n; ++v)
      if (coef(rng) > 0.0) row.push_back({v, coef(rng)});
    if (row.empty()) row.push_back({0, 1.0});
    // Right-hand side keeps x = 0 feasible for <= rows.
    if (r % 3 == 0)
      model.add_row(RowSense::LessEqual, pos(rng), row);
    else if (r % 3 == 1)
      model.add_row(RowSense::GreaterEqual, -pos(rng), row);
    else
      model.add_row(RowSense::LessEqual, 2.0 * pos(rng), row);
  }
  return model;
}

}  // namespace

TEST_CASE("one variable lower bound row") {
  LinearModel m;
  int x = m.add_var(0.0, kInfinity, 1.0, "x");
  m.add_row(RowSense::GreaterEqual, 3.0, {{x, 1.0}});
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(s.primal[x] == doctest::Approx(3.0));
  REQUIRE(s.dual.size() == 1);
  CHECK(s.dual[0] == doctest::Approx(1.0));
}

TEST_CASE("simplex on a unit constraint") {
  LinearModel m;
  m.sense = ObjSense::Maximize;
  int x = m.add_var(0.0, kInfinity, 1.0, "x");
  int y = m.add_var(0.0, kInfinity, 1.0, "y");
  m.add_row(RowSense::LessEqual, 1.0, {{x, 1.0}, {y, 1.0}});
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(dual_objective_value(m, s) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("infeasible bounds and rows") {
  LinearModel m;
  int x = m.add_var(0.0, 2.0, 1.0);
  m.add_row(RowSense::GreaterEqual, 3.0, {{x, 1.0}});
  CHECK(solve_lp(m).status == SolveStatus::Infeasible);

  LinearModel m2;
  int a = m2.add_var(0.0, 1.0, 0.0);
  int b = m2.add_var(0.0, 1.0, 0.0);
  m2.add_row(RowSense::Equal, 3.0, {{a, 1.0}, {b, 1.0}});
  CHECK(solve_lp(m2).status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded ray detected") {
  LinearModel m;
  int x = m.add_var(0.0, kInfinity, -1.0);
  m.add_row(RowSense::GreaterEqual, 0.0, {{x, 1.0}});
  CHECK(solve_lp(m).status == SolveStatus::Unbounded);
}

TEST_CASE("free variables and equalities") {
  LinearModel m;
  int x = m.add_var(-kInfinity, kInfinity, 1.0, "x");
  int y = m.add_var(0.0, 1.0, -1.0, "y");
  m.add_row(RowSense::Equal, 5.0, {{x, 1.0}, {y, 1.0}});
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.primal[x] == doctest::Approx(4.0));
  CHECK(s.primal[y] == doctest::Approx(1.0));
}

TEST_CASE("degenerate equalities") {
  // Transportation-like system with ties everywhere.
  LinearModel m;
  std::vector<int> v;
  for (int i = 0; i < 4; ++i) v.push_back(m.add_var(0.0, kInfinity, 1.0 + i));
  m.add_row(RowSense::Equal, 1.0, {{v[0], 1.0}, {v[1], 1.0}});
  m.add_row(RowSense::Equal, 1.0, {{v[2], 1.0}, {v[3], 1.0}});
  m.add_row(RowSense::Equal, 1.0, {{v[0], 1.0}, {v[2], 1.0}});
  m.add_row(RowSense::Equal, 1.0, {{v[1], 1.0}, {v[3], 1.0}});
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(5.0));  // x0=x3=1 or x1=x2=1 both cost 5
}

TEST_CASE("strong duality and feasibility on random box LPs") {
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 60; ++trial) {
    LinearModel m = random_box_lp(rng, 3 + trial % 8, 2 + trial % 6);
    Solution s = solve_lp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(m.max_violation(s.primal) <= 1e-6);
    CHECK(dual_objective_value(m, s) ==
          doctest::Approx(s.objective).epsilon(1e-6));
  }
}

TEST_CASE("warm start matches cold solve after a bound change") {
  std::mt19937_64 rng(7);
  LinearModel m = random_box_lp(rng, 6, 5);
  Solution s0 = solve_lp(m);
  REQUIRE(s0.status == SolveStatus::Optimal);
  m.set_bounds(2, 0.0, 0.05);
  Solution warm = solve_lp(m, {}, &s0.basis);
  Solution cold = solve_lp(m);
  REQUIRE(warm.status == SolveStatus::Optimal);
  REQUIRE(cold.status == SolveStatus::Optimal);
  CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-8));
}

TEST_CASE("mip without binaries equals lp") {
  std::mt19937_64 rng(99);
  LinearModel m = random_box_lp(rng, 5, 4);
  Solution lp = solve_lp(m);
  Solution mip = solve_mip(m);
  REQUIRE(mip.status == SolveStatus::Optimal);
  CHECK(mip.objective == doctest::Approx(lp.objective));
  CHECK(mip.dual.size() == lp.dual.size());
}

TEST_CASE("integral root requires no branching") {
  LinearModel m;
  m.sense = ObjSense::Maximize;
  int a = m.add_var(0.0, 1.0, 2.0, "a");
  int b = m.add_var(0.0, 1.0, 1.0, "b");
  m.set_binary(a);
  m.set_binary(b);
  m.add_row(RowSense::LessEqual, 2.0, {{a, 1.0}, {b, 1.0}});
  Solution lp = solve_lp(m);
  Solution mip = solve_mip(m);
  REQUIRE(mip.status == SolveStatus::Optimal);
  CHECK(mip.nodes == 1);
  CHECK(mip.objective == lp.objective);
  CHECK(mip.dual == lp.dual);  // identical result, duals included
}

TEST_CASE("iteration limit reported honestly") {
  std::mt19937_64 rng(11);
  LinearModel m = random_box_lp(rng, 10, 8);
  SimplexOptions opt;
  opt.max_iterations = 1;
  Solution s = solve_lp(m, opt);
  CHECK(s.status == SolveStatus::IterationLimit);
}

TEST_CASE("knapsack via branch and bound") {
  LinearModel m;
  m.sense = ObjSense::Maximize;
  int a = m.add_var(0.0, 1.0, 5.0, "a");
  int b = m.add_var(0.0, 1.0, 4.0, "b");
  int c = m.add_var(0.0, 1.0, 3.0, "c");
  m.set_binary(a);
  m.set_binary(b);
  m.set_binary(c);
  m.add_row(RowSense::LessEqual, 5.0, {{a, 2.0}, {b, 3.0}, {c, 1.0}});
  Solution s = solve_mip(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(9.0));
  CHECK(s.primal[a] == doctest::Approx(1.0));
  CHECK(s.primal[b] == doctest::Approx(1.0));
  CHECK(s.primal[c] == doctest::Approx(0.0));
  CHECK(s.bound == doctest::Approx(9.0));
}

TEST_CASE("integer infeasible mip") {
  LinearModel m;
  int a = m.add_var(0.0, 1.0, 1.0);
  int b = m.add_var(0.0, 1.0, 1.0);
  m.set_binary(a);
  m.set_binary(b);
  m.add_row(RowSense::Equal, 0.5, {{a, 1.0}, {b, 1.0}});
  CHECK(solve_mip(m).status == SolveStatus::Infeasible);
}

TEST_CASE("mip incumbent satisfies rows and integrality") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 25; ++trial) {
    LinearModel m = random_box_lp(rng, 6, 4);
    for (int v = 0; v < 3; ++v) {
      m.set_bounds(v, 0.0, 1.0);
      m.set_binary(v);
    }
    Solution s = solve_mip(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(m.max_violation(s.primal) <= 1e-6);
    for (int v = 0; v < 3; ++v) {
      double f = s.primal[v] - std::floor(s.primal[v]);
      CHECK(std::min(f, 1.0 - f) <= 1e-6);
    }
    CHECK(s.bound <= s.objective + 1e-9);
  }
}

TEST_CASE("lp format: empty model") {
  LinearModel empty;
  std::string text = write_lp_format(empty);
  CHECK(text.find("Minimize") == 0);
  CHECK(text.find("End") != std::string::npos);
  LinearModel back = read_lp_format(text);
  CHECK(back.num_vars() == 0);
  CHECK(back.num_rows() == 0);
}

TEST_CASE("lp format: bounds section for a unit box variable") {
  LinearModel m;
  m.add_var(0.0, 1.0, 1.0);
  std::string text = write_lp_format(m);
  CHECK(text.find("0 <= x0 <= 1") != std::string::npos);
}

TEST_CASE("lp format: write/read round trip is stable") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    LinearModel m = random_box_lp(rng, 4 + trial % 5, 3 + trial % 4);
    if (trial % 2 == 0) {
      m.set_bounds(0, 0.0, 1.0);
      m.set_binary(0);
    }
    if (trial % 3 == 0) m.sense = ObjSense::Maximize;
    m.obj_constant = trial * 0.25;
    std::string t1 = write_lp_format(m);
    LinearModel back = read_lp_format(t1);
    std::string t2 = write_lp_format(back);
    CHECK(t1 == t2);
    Solution s1 = trial % 2 == 0 ? solve_mip(m) : solve_lp(m);
    Solution s2 = trial % 2 == 0 ? solve_mip(back) : solve_lp(back);
    REQUIRE(s1.status == SolveStatus::Optimal);
    REQUIRE(s2.status == SolveStatus::Optimal);
    CHECK(s1.objective == doctest::Approx(s2.objective).epsilon(1e-9));
  }
}
