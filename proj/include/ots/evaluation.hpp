#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ots/config.hpp"
#include "ots/formulation.hpp"
#include "ots/report.hpp"

namespace ots {

enum class Method : std::uint8_t { Det, Saa, Ldr, DualLdr, Oracle };

std::string method_name(Method m);
// Throws ValidationError for unknown names.
Method parse_method(std::string_view name);

struct RunOptions {
  int samples = 500;  // SAA only
  std::uint64_t seed = 1;
  SolverConfig cfg;
};

struct MethodResult {
  Method method = Method::Det;
  int max_open = 0;
  MathProgram program;  // the program whose solution is `report`
  SolveReport report;
  long long n_rows = 0;  // of the full formulation
  long long n_vars = 0;
  std::optional<FirstStage> first_stage;  // when optimal
  std::optional<AffinePolicy> policy;     // primal LDR
  std::vector<int> open_lines;            // 1-based line numbers
  double wall_seconds = 0.0;

  bool optimal() const { return report.status == SolveStatus::Optimal; }
  EvaluationRow row(const Grid& grid) const;
};

// SAA draws `samples` scenarios from `poly` with `seed`; it and the oracle
// are solved by scenario generation.
MethodResult run_method(Method method, const Grid& grid, const NetworkOperators& ops,
                        int max_open, const UncertaintyPolytope& poly,
                        const RunOptions& options = {});

struct OutOfSample {
  double mean_cost = 0.0;  // over feasible scenarios; NaN if none
  int infeasible = 0;
  int evaluated = 0;
};

// Second-stage LP per scenario with the first stage fixed.
OutOfSample out_of_sample(const Grid& grid, const NetworkOperators& ops,
                          const FirstStage& fs,
                          std::span<const Eigen::VectorXd> scenarios,
                          const SolverConfig& cfg = {});

// Fresh scenarios for out-of-sample tests, drawn from a stream separate
// from the in-sample SAA draws of the same seed.
std::vector<Eigen::VectorXd> out_of_sample_scenarios(const UncertaintyPolytope& poly,
                                                     int count, std::uint64_t seed);

double gap_percent(double upper, double lower);

struct BoundGap {
  MethodResult upper;  // primal LDR
  MethodResult lower;  // dual LDR
  std::optional<MethodResult> oracle;
  std::optional<double> gap;  // percent, when both bounds are optimal
};

// The oracle runs when the support has at most `oracle_max_dim` active
// coordinates.
BoundGap bound_gap(const Grid& grid, const NetworkOperators& ops, int max_open,
                   const UncertaintyPolytope& poly, const RunOptions& options = {},
                   int oracle_max_dim = 10);

struct BenchOptions {
  std::vector<int> s_list;
  std::uint64_t seed = 1;
  SolverConfig cfg;
  // Per monolithic SAA solve; 0 disables.
  double saa_time_limit = 60.0;
  // Also time the scenario-generation SAA ("saa-gen" rows).
  bool with_generation = true;
};

// SAA rows per S (monolithic program: sizes from the builder, wall time of
// solve_milp under the time limit) followed by one primal-LDR row.
EvaluationTable scaling_benchmark(const Grid& grid, const NetworkOperators& ops,
                                  int max_open, const UncertaintyPolytope& poly,
                                  const BenchOptions& options);

// Whether (S, n_rows) of the rows with `method` lie on one line, checked
// in exact integer arithmetic.
bool rows_affine_in_samples(const EvaluationTable& table, const std::string& method);

// Primal-LDR wall time with one row per L_o and one column per K.
std::string ldr_time_table_csv(const EvaluationTable& table);

}  // namespace ots
