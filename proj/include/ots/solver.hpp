#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ots/config.hpp"
#include "ots/program.hpp"

namespace ots {

enum class SolveStatus : std::uint8_t {
  Optimal,
  Infeasible,
  Unbounded,
  IterLimit,
  NodeLimit,
  TimeLimit,
  NumericalError,
};

std::string to_string(SolveStatus s);

enum class BasisStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };

// Simplex basis: one status per column and one per row (the row's logical).
struct Basis {
  std::vector<BasisStatus> cols;
  std::vector<BasisStatus> rows;
  // Optional pricing weights of the basic variables, indexed like
  // cols followed by rows; only meaningful to the engine that wrote them.
  std::vector<double> weights;
  bool empty() const { return cols.empty() && rows.empty(); }
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalError;
  double objective = 0.0;
  std::vector<double> x;             // one value per variable
  std::vector<double> row_activity;  // a_i'x per row
  // LP only. duals[i] is the multiplier of row i in the Lagrangian
  // c'x - y'(Ax); reduced_costs = c - A'y.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  // Infeasible LP only: row weights y with farkas_gap(prog, y) > 0.
  std::vector<double> farkas;
  Basis basis;

  long long iterations = 0;
  long long nodes = 0;
  double best_bound = 0.0;  // MILP: final global lower bound
  double wall_seconds = 0.0;
  // MILP: bound of each processed node in processing order.
  std::vector<double> bound_trace;
  std::string message;

  // Values of the named variable block (row-major for matrix blocks).
  std::vector<double> block_values(const MathProgram& prog,
                                   const std::string& name) const;
  // 0-based indices into the z block with z < 0.5.
  std::vector<int> open_lines(const MathProgram& prog) const;
};

// Solves the continuous relaxation (binaries relaxed to [0, 1]).
SolveReport solve_lp(const MathProgram& prog, const SolverConfig& cfg = {},
                     const Basis* warm_start = nullptr);

// Branch and bound over the binary block. Among optimal solutions the one
// whose open-line indicator vector is lexicographically smallest wins.
SolveReport solve_milp(const MathProgram& prog, const SolverConfig& cfg = {});

// Solves one LP for every z with at most `max_open` zeros and returns the
// best. Throws EnumerationTooLargeError above 10^6 candidates.
SolveReport enumerate_milp(const MathProgram& prog, int max_open,
                           const SolverConfig& cfg = {});

// Separation of {y'Ax : x in column box} and {y'r : r in row box}. A
// positive value proves that no x satisfies both the rows and the bounds.
double farkas_gap(const MathProgram& prog, std::span<const double> y);

// Lexicographic order on open-line sets via their indicator vectors:
// a < b iff the smallest element of the symmetric difference is in b.
bool open_set_less(std::span<const int> a, std::span<const int> b);

}  // namespace ots
