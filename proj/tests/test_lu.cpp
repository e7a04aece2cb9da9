#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "solver/lu_factor.hpp"

using ots::detail::LuFactor;

namespace {

struct DenseCols {
  std::vector<std::vector<int>> rows;
  std::vector<std::vector<double>> vals;
};

DenseCols columns_of(const Eigen::MatrixXd& b) {
  DenseCols c;
  const int m = static_cast<int>(b.rows());
  c.rows.resize(m);
  c.vals.resize(m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (b(i, j) != 0.0) {
        c.rows[j].push_back(i);
        c.vals[j].push_back(b(i, j));
      }
    }
  }
  return c;
}

LuFactor::Result factor(LuFactor& lu, const DenseCols& c) {
  return lu.factorize(static_cast<int>(c.rows.size()), [&](int p) {
    return LuFactor::SparseColumn{c.rows[p], c.vals[p]};
  });
}

Eigen::MatrixXd random_sparse(std::mt19937_64& gen, int m, double density) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (keep(gen)) b(i, j) = u(gen);
    }
    b(i, i) += 2.0 * (u(gen) > 0 ? 1 : -1) * (i % 3 == 0 ? 1e-3 : 1.0);
  }
  return b;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

TEST_CASE("lu solves match dense solves on random sparse bases") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 5 + trial * 3;
    Eigen::MatrixXd b = random_sparse(gen, m, trial % 2 ? 0.05 : 0.3);
    // Shuffle columns so the diagonal is not the natural pivot order.
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(m);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + m, gen);
    b = b * perm;
    LuFactor lu;
    auto res = factor(lu, columns_of(b));
    REQUIRE(res.singular_positions.empty());

    Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(m, [&] { return u(gen); });
    std::vector<double> x = to_vec(a);
    lu.ftran(x);
    Eigen::VectorXd expect = b.fullPivLu().solve(a);
    for (int i = 0; i < m; ++i) CHECK(x[i] == doctest::Approx(expect[i]).epsilon(1e-9));

    std::vector<double> y = to_vec(a);
    lu.btran(y);
    Eigen::VectorXd expect_t = b.transpose().fullPivLu().solve(a);
    for (int i = 0; i < m; ++i) CHECK(y[i] == doctest::Approx(expect_t[i]).epsilon(1e-9));
  }
}

TEST_CASE("eta updates track column replacements") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int m = 30;
  Eigen::MatrixXd b = random_sparse(gen, m, 0.1);
  LuFactor lu;
  REQUIRE(factor(lu, columns_of(b)).singular_positions.empty());
  for (int step = 0; step < 25; ++step) {
    Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(m, [&] { return u(gen); });
    std::vector<double> col = to_vec(a);
    lu.ftran(col);
    const int pos = step * 7 % m;
    if (std::abs(col[pos]) < 1e-3) continue;
    lu.update(pos, col);
    b.col(pos) = a;
    Eigen::VectorXd rhs = Eigen::VectorXd::NullaryExpr(m, [&] { return u(gen); });
    std::vector<double> x = to_vec(rhs);
    lu.ftran(x);
    Eigen::VectorXd expect = b.fullPivLu().solve(rhs);
    for (int i = 0; i < m; ++i) CHECK(x[i] == doctest::Approx(expect[i]).epsilon(1e-8));
    std::vector<double> y = to_vec(rhs);
    lu.btran(y);
    Eigen::VectorXd expect_t = b.transpose().fullPivLu().solve(rhs);
    for (int i = 0; i < m; ++i) CHECK(y[i] == doctest::Approx(expect_t[i]).epsilon(1e-8));
  }
  CHECK(lu.num_updates() > 0);
}

TEST_CASE("singular bases report unpivoted positions and free rows") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
  b(0, 0) = 1;
  b(1, 1) = 2;
  b(1, 2) = 4;  // column 2 = 2 * column 1
  b(2, 3) = 1;
  LuFactor lu;
  auto res = factor(lu, columns_of(b));
  CHECK(res.singular_positions.size() == 1);
  CHECK(res.free_rows.size() == 1);
  CHECK(res.free_rows[0] == 3);
}
