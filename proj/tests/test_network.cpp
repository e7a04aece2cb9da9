#include <doctest.h>

#include <Eigen/Dense>

#include "fixtures.hpp"
#include "ots/network.hpp"

using namespace ots;

TEST_CASE("two-bus operators") {
  const Grid g = make_grid(testing::two_bus_case());
  const NetworkOperators ops = build_operators(g);
  CHECK(Eigen::MatrixXd(ops.A) == (Eigen::MatrixXd(2, 1) << 1, -1).finished());
  CHECK(Eigen::MatrixXd(ops.K_mat) == (Eigen::MatrixXd(1, 2) << 10, -10).finished());
  CHECK(ops.M_diag[0] == doctest::Approx(6.0));
  CHECK(ops.F.cols() == 0);
}

TEST_CASE("per-unit conversion and defaults") {
  CaseFile c = testing::two_bus_case();
  c.lines[0].dtheta_max.reset();
  c.buses[1].theta_min = -0.2;
  const Grid g = make_grid(c);
  CHECK(g.buses[1].load == doctest::Approx(1.0));
  CHECK(g.lines[0].f_max == doctest::Approx(1.5));
  CHECK(g.gens[0].cost == doctest::Approx(10.0));
  CHECK(g.gens[0].agc == false);
  CHECK(g.lines[0].switchable);
  // min(0.6 - (-0.2), 0.6 - (-0.6))
  CHECK(g.lines[0].dtheta_max == doctest::Approx(0.8));
}

TEST_CASE("triangle incidence has rank two") {
  CaseFile c = testing::two_bus_case();
  c.buses.push_back({3, -0.6, 0.6, 0.0});
  LineData l = c.lines[0];
  l.from = 2;
  l.to = 3;
  c.lines.push_back(l);
  l.from = 3;
  l.to = 1;
  c.lines.push_back(l);
  const NetworkOperators ops = build_operators(make_grid(c));
  const Eigen::MatrixXd a(ops.A);
  CHECK(a.rows() == 3);
  CHECK(a.cols() == 3);
  CHECK(a.colwise().sum().cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(a).rank() == 2);
}

TEST_CASE("operator invariants on random grids") {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    testing::RandomCaseOptions opt;
    opt.wind = 1 + trial % 3;
    const Grid g = make_grid(testing::random_case(rng, opt));
    const auto ops = build_operators(g);
    const Eigen::MatrixXd a(ops.A), k(ops.K_mat), f(ops.F);
    for (int e = 0; e < g.num_lines(); ++e) {
      CHECK(a.col(e).cwiseAbs().sum() == 2.0);
      CHECK(a.col(e).sum() == 0.0);
      CHECK((k.row(e).array() != 0.0).count() == 2);
      CHECK(k(e, g.lines[e].from) == g.lines[e].b);
      CHECK(k(e, g.lines[e].to) == -g.lines[e].b);
      CHECK(ops.M_diag[e] > 0.0);
    }
    for (int w = 0; w < g.num_wind(); ++w) {
      CHECK(f.col(w).sum() == 1.0);
      CHECK(f(g.wind[w].bus, w) == 1.0);
    }
    // 1'A K theta = 0 and the Big-M bound over the angle box.
    Eigen::VectorXd theta(g.num_buses());
    for (int i = 0; i < theta.size(); ++i) theta[i] = rng.uniform01() - 0.5;
    theta[g.ref] = 0.0;
    CHECK(std::abs((a * (k * theta)).sum()) <= 1e-12);
    for (int e = 0; e < g.num_lines(); ++e) {
      const double dt =
          std::clamp(theta[g.lines[e].from] - theta[g.lines[e].to],
                     -g.lines[e].dtheta_max, g.lines[e].dtheta_max);
      CHECK(std::abs(g.lines[e].b * dt) <= ops.M_diag[e] + 1e-12);
    }
    CHECK(is_connected(g));
  }
}

TEST_CASE("connectivity of closed lines") {
  const Grid g = make_grid(testing::two_bus_case());
  CHECK(is_connected(g, {true}));
  CHECK_FALSE(is_connected(g, {false}));
}
