#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "ots/config.hpp"
#include "ots/program.hpp"
#include "ots/solver.hpp"
#include "solver/lu_factor.hpp"

namespace ots::detail {

// Bounded revised simplex on min c'x s.t. Ax - r = 0, l <= x <= u,
// L <= r <= U. The logical r_i is variable n + i. Works on a scaled copy of
// the program; all accessors return original units.
//
// solve() runs the dual simplex on perturbed/shifted costs, then restores
// the costs and finishes with the primal simplex when needed. Bounds may be
// changed between calls; the basis is kept as a warm start.
class LpEngine {
 public:
  LpEngine(const MathProgram& prog, const SolverConfig& cfg);

  int num_cols() const { return n_; }
  int num_rows() const { return m_; }

  void set_col_bounds(int j, double lower, double upper);
  double col_lower(int j) const { return lo_[j] * cscale_[j]; }
  double col_upper(int j) const { return up_[j] * cscale_[j]; }

  SolveStatus solve();

  Basis basis() const;
  // Falls back to the slack basis when `b` is malformed.
  void set_basis(const Basis& b);

  double objective() const;
  std::vector<double> primal() const;
  std::vector<double> row_activity() const;
  std::vector<double> duals() const;
  std::vector<double> reduced_costs() const;
  std::vector<double> farkas() const;
  long long iterations() const { return iterations_; }
  const std::string& message() const { return message_; }

 private:
  enum class Status : std::uint8_t { Basic, Lower, Upper, Free };
  enum class Outcome : std::uint8_t {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    Numerical,
    Retry
  };

  void scale(const MathProgram& prog);
  void slack_basis();
  void place_nonbasic(int j);
  LuFactor::SparseColumn column(int j) const;

  bool needs_refactor() const;
  bool refactor();
  void compute_primal();
  void compute_duals(const std::vector<double>& cost);
  void dot_row(const std::vector<double>& rho, std::vector<double>& alpha,
               std::vector<int>& index);
  double max_primal_infeasibility() const;
  void perturb_and_shift();
  // Flips boxed nonbasics with the wrong reduced-cost sign to the other
  // bound and shifts the working cost of the rest.
  void correct_dual_infeasibilities();

  Outcome dual_simplex();
  Outcome primal_simplex();
  void pivot(int r, int q, const std::vector<double>& col);
  bool out_of_budget();

  const SolverConfig cfg_;
  int n_ = 0;
  int m_ = 0;

  // Scaled structural matrix, both orientations.
  std::vector<int> a_start_, a_row_;
  std::vector<double> a_val_;
  std::vector<int> r_start_, r_col_;
  std::vector<double> r_val_;
  std::vector<int> logical_row_;
  std::vector<double> minus_one_;

  std::vector<double> cscale_;  // x_j = cscale_j * x'_j (logicals: 1/R_i)
  std::vector<double> rscale_;
  double objscale_ = 1.0;
  double obj_constant_ = 0.0;

  std::vector<double> cost_;       // scaled true costs, length n + m
  std::vector<double> work_cost_;  // costs the dual phase runs on
  std::vector<double> lo_, up_;    // scaled bounds, length n + m

  std::vector<double> x_, d_;
  std::vector<double> y_;
  std::vector<Status> status_;
  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<double> dse_;

  LuFactor lu_;
  bool factored_ = false;
  bool bland_ = false;

  // Scratch.
  std::vector<double> rho_, alpha_, col_, tau_, flip_;
  std::vector<std::pair<double, int>> cand_;
  std::vector<int> alpha_index_;
  std::vector<std::uint8_t> row_mark_;

  std::vector<double> farkas_;
  long long iterations_ = 0;
  std::chrono::steady_clock::time_point start_;
  std::string message_;
};

}  // namespace ots::detail
