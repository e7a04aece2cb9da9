#pragma once

#include <string>

namespace ots {

// All solver tolerances and limits in one place.
struct SolverConfig {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  double int_tol = 1e-9;
  double mip_gap = 1e-6;  // relative
  double mip_gap_abs = 1e-9;
  double pivot_tol = 1e-7;

  long long max_iterations = 5'000'000;
  long long max_nodes = 2'000'000;
  int refactor_interval = 100;
  bool scaling = true;
  bool cost_perturbation = true;
  bool dual_steepest_edge = false;

  double time_limit_seconds = 0.0;  // 0 disables
};

// Reads a JSON object with any subset of the SolverConfig fields (same
// names). Unknown keys are rejected.
SolverConfig load_solver_config(const std::string& path);

// Returns load_solver_config($OTS_LDR_CONFIG) when the variable is set and
// non-empty, otherwise the defaults.
SolverConfig solver_config_from_env();

}  // namespace ots
