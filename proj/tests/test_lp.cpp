#include <doctest.h>

#include <random>

#include "lp_checks.hpp"
#include "ots/solver.hpp"

using namespace ots;

TEST_CASE("min -x with x <= 3 has dual -1") {
  MathProgram p;
  auto x = p.add_block("x", 1, 0.0, kInf);
  p.add_row(LinearExpr::variable(x.at(0)), Sense::LessEqual, 3.0, "cap");
  p.set_objective(LinearExpr::variable(x.at(0), -1.0));
  auto rep = solve_lp(p);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(rep.x[0] == doctest::Approx(3.0));
  CHECK(rep.objective == doctest::Approx(-3.0));
  CHECK(rep.duals[0] == doctest::Approx(-1.0));
}

TEST_CASE("infeasible pair yields a Farkas certificate") {
  MathProgram p;
  auto x = p.add_block("x", 1, -kInf, kInf);
  p.add_row(LinearExpr::variable(x.at(0)), Sense::LessEqual, 0.0, "a");
  p.add_row(LinearExpr::variable(x.at(0)), Sense::GreaterEqual, 1.0, "b");
  auto rep = solve_lp(p);
  REQUIRE(rep.status == SolveStatus::Infeasible);
  REQUIRE(rep.farkas.size() == 2);
  // y'A = 0 and the row box cannot reach zero.
  CHECK(rep.farkas[0] + rep.farkas[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(farkas_gap(p, rep.farkas) > 1e-9);
}

TEST_CASE("unbounded LP is detected") {
  MathProgram p;
  auto x = p.add_block("x", 2, 0.0, kInf);
  p.add_row(LinearExpr::variable(x.at(0)) - LinearExpr::variable(x.at(1)),
            Sense::LessEqual, 1.0, "r");
  p.set_objective(LinearExpr::variable(x.at(1), -1.0));
  CHECK(solve_lp(p).status == SolveStatus::Unbounded);
}

TEST_CASE("program without rows") {
  MathProgram p;
  auto x = p.add_block("x", 3, -1.0, 2.0);
  LinearExpr obj;
  obj.add(x.at(0), 1.0).add(x.at(1), -2.0).add_constant(5.0);
  p.set_objective(obj);
  auto rep = solve_lp(p);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(rep.objective == doctest::Approx(5.0 - 1.0 - 4.0));
}

TEST_CASE("random LPs satisfy KKT conditions") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 10 + trial;
    const int n = 15 + 2 * trial;
    MathProgram p = testing::random_bounded_lp(gen, m, n, 0.15);
    auto rep = solve_lp(p);
    INFO("trial " << trial);
    REQUIRE(rep.status == SolveStatus::Optimal);
    auto r = testing::kkt(p, rep);
    CHECK(r.primal <= 1e-8);
    CHECK(r.dual_sign <= 1e-7);
    CHECK(r.reduced_cost_consistency <= 1e-8);
    CHECK(r.duality_gap <= 1e-8 * (1.0 + std::abs(rep.objective)));
  }
}

TEST_CASE("warm start after a bound change matches a cold solve") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 15; ++trial) {
    MathProgram p = testing::random_bounded_lp(gen, 30, 45, 0.2);
    auto first = solve_lp(p);
    REQUIRE(first.status == SolveStatus::Optimal);
    // Tighten a variable that is strictly inside its box, when one exists.
    int j = -1;
    for (int k = 0; k < p.num_vars(); ++k) {
      if (std::isfinite(p.var_lower(k)) && std::isfinite(p.var_upper(k)) &&
          first.x[k] > p.var_lower(k) + 1e-3 && first.x[k] < p.var_upper(k) - 1e-3) {
        j = k;
        break;
      }
    }
    if (j < 0) continue;
    p.set_var_bounds(j, p.var_lower(j), 0.5 * (p.var_lower(j) + first.x[j]));
    auto warm = solve_lp(p, {}, &first.basis);
    auto cold = solve_lp(p);
    REQUIRE(cold.status == warm.status);
    if (cold.status == SolveStatus::Optimal) {
      CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
    }
  }
}

TEST_CASE("open-line lexicographic order") {
  std::vector<int> a{20}, b{19}, empty;
  CHECK(open_set_less(a, b));
  CHECK_FALSE(open_set_less(b, a));
  CHECK(open_set_less(empty, a));
  CHECK_FALSE(open_set_less(a, a));
  std::vector<int> c{3, 9}, d{3};
  CHECK(open_set_less(d, c));
}
