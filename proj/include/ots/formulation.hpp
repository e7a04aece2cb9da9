#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ots/config.hpp"
#include "ots/network.hpp"
#include "ots/program.hpp"
#include "ots/solver.hpp"
#include "ots/uncertainty.hpp"

namespace ots {

// Block names shared by every builder.
namespace blocks {
inline constexpr const char* kG = "g";
inline constexpr const char* kTheta = "theta";
inline constexpr const char* kF = "f";
inline constexpr const char* kZ = "z";
inline constexpr const char* kGamma = "gamma";
inline constexpr const char* kYTheta = "Y_theta";
inline constexpr const char* kYThetaConst = "y_theta";
inline constexpr const char* kYF = "Y_f";
inline constexpr const char* kYFConst = "y_f";
inline constexpr const char* kThetaRec = "theta_rec";  // scenarios x N
inline constexpr const char* kFRec = "f_rec";          // scenarios x L
}  // namespace blocks

// Deterministic OTS: dispatch g, angles theta (reference pinned to 0),
// flows f and one binary z per switchable line. Bounds live on the columns;
// rows are the switched flow limits, the Big-M pair, the flow equation of
// fixed lines, nodal balance (nominal wind included) and the cardinality
// row sum(z) >= Ls - L_o.
MathProgram build_deterministic(const Grid& grid, const NetworkOperators& ops,
                                int max_open);

// Two-stage model on the given full-space scenarios: the deterministic
// block, AGC coefficients gamma and per-scenario recourse blocks
// theta_rec/f_rec. Objective c'g + q'gamma * mean(1'xi).
// Throws ScenarioOutsideSupportError when a scenario leaves `poly`.
MathProgram build_saa(const Grid& grid, const NetworkOperators& ops, int max_open,
                      const UncertaintyPolytope& poly,
                      std::span<const Eigen::VectorXd> scenarios);

// Two-stage program over a finite scenario list solved by scenario
// generation: the program is solved on a growing subset of the scenarios
// (objective weight of gamma fixed in advance) until the first stage admits
// recourse in every scenario. The subset program is a relaxation with the
// same objective, so the result, including the open-set tie-break, is that
// of the program on all scenarios.
struct ScenarioSolve {
  MathProgram program;  // subset program of the last round
  SolveReport report;   // totals over all rounds
  ProgramMetadata full;  // metadata of the program on every scenario
  std::vector<int> active;
  int rounds = 0;
};

// Exact build_saa optimum (objective weight = sample mean of 1'xi).
ScenarioSolve solve_saa(const Grid& grid, const NetworkOperators& ops, int max_open,
                        const UncertaintyPolytope& poly,
                        std::span<const Eigen::VectorXd> scenarios,
                        const SolverConfig& cfg = {});

// One constraint const(x) + sum_k coeff_k(x) xi'_k <= rhs over the active
// uncertainty coordinates xi'.
struct UncertainRow {
  LinearExpr constant;
  std::vector<LinearExpr> coeff;
  double rhs = 0.0;
  std::string name;
};

// Encodes every row for all xi' in poly by adding a nonnegative block
// `alpha` (rows x m) with alpha_r S = coeff_r and const_r + alpha_r t <= rhs_r.
// Returns the alpha block.
VarBlock robustify_le(MathProgram& prog, std::span<const UncertainRow> rows,
                      const UncertaintyPolytope& poly, const std::string& alpha_name);

// Encodes const(x) + coeff(x)'xi' = rhs for all xi' in poly as coeff = 0 and
// const = rhs. Valid because supports are full-dimensional by construction.
void split_equality(MathProgram& prog, std::span<const UncertainRow> rows,
                    const UncertaintyPolytope& poly);

// Primal linear decision rule reformulation (an upper bound).
MathProgram build_primal_ldr(const Grid& grid, const NetworkOperators& ops,
                             int max_open, const UncertaintyPolytope& poly);

struct DualLdrOptions {
  // Fixes the switching decision instead of optimizing it.
  std::optional<std::vector<int>> fixed_open_lines;
};

// Lower bound from affine multipliers: constraints that involve recourse
// are only enforced in expectation against the nonnegative affine weights
// 1 and t_j - S_j xi', which needs mu and E[xi' xi'^T].
// Throws MissingMomentsError without second moments.
MathProgram build_dual_ldr(const Grid& grid, const NetworkOperators& ops,
                           int max_open, const UncertaintyPolytope& poly,
                           const DualLdrOptions& options = {});

// Two-stage model enforced at every vertex of a box support, with the
// mean objective: the exact optimum for box supports.
MathProgram build_vertex_oracle(const Grid& grid, const NetworkOperators& ops,
                                int max_open, const UncertaintyPolytope& poly);
// build_vertex_oracle's optimum via scenario generation over the vertices.
ScenarioSolve exact_vertex_oracle(const Grid& grid, const NetworkOperators& ops,
                                  int max_open, const UncertaintyPolytope& poly,
                                  const SolverConfig& cfg = {});

// Here-and-now decisions read back from a solved program. z is rounded;
// open_lines holds 0-based line indices.
struct FirstStage {
  std::vector<double> g;
  std::vector<double> theta;
  std::vector<double> f;
  std::vector<double> gamma;  // zeros for single-stage programs
  std::vector<bool> closed;   // per line
  std::vector<int> open_lines;
};

FirstStage extract_first_stage(const Grid& grid, const MathProgram& prog,
                               const SolveReport& report);

// Second-stage LP at one realization with the first stage fixed. Variables
// theta_rec, f_rec and nonnegative slacks on nodal balance; minimizes the
// total slack. Recourse with zero slack exists iff the optimum is zero and
// the reserve and generator rows hold.
MathProgram build_second_stage(const Grid& grid, const NetworkOperators& ops,
                               const FirstStage& fs, const Eigen::VectorXd& xi);

struct RecourseCheck {
  bool feasible = false;
  double shortfall = 0.0;  // slack total plus reserve/generator violation, p.u.
  long long iterations = 0;
};

// `basis` warm-starts the LP and receives the final basis.
RecourseCheck check_recourse(const Grid& grid, const NetworkOperators& ops,
                             const FirstStage& fs, const Eigen::VectorXd& xi,
                             const SolverConfig& cfg = {}, Basis* basis = nullptr);

// Recourse theta' = Y_theta xi + y_theta, f' = Y_f xi + y_f in full
// coordinates; g' = gamma * (1'xi).
struct AffinePolicy {
  Eigen::MatrixXd Y_theta;
  Eigen::VectorXd y_theta;
  Eigen::MatrixXd Y_f;
  Eigen::VectorXd y_f;
  Eigen::VectorXd gamma;
};

AffinePolicy extract_policy(const MathProgram& prog, const SolveReport& report,
                            const UncertaintyPolytope& poly);

// Largest violation of the second-stage constraints (reserve, generator,
// angle, flow, balance and Big-M rows) at xi for the given recourse.
double recourse_violation(const Grid& grid, const NetworkOperators& ops,
                          const FirstStage& fs, const Eigen::VectorXd& xi,
                          const Eigen::VectorXd& theta_rec,
                          const Eigen::VectorXd& f_rec);
double policy_violation(const Grid& grid, const NetworkOperators& ops,
                        const FirstStage& fs, const AffinePolicy& policy,
                        const Eigen::VectorXd& xi);

// First-stage cost c'g + q'gamma * (1'xi) for one realization.
double realized_cost(const Grid& grid, const FirstStage& fs, const Eigen::VectorXd& xi);

}  // namespace ots
