#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ots/solver.hpp"

namespace ots {

struct EvaluationRow {
  std::string method;  // det, saa, ldr, dual-ldr or oracle
  int max_open = 0;
  int K = 0;
  std::optional<int> samples;
  double objective = 0.0;  // $/h
  std::optional<double> out_of_sample_cost;
  std::optional<int> infeasible_scenario_count;
  std::optional<double> bound_gap_percent;
  long long n_rows = 0;
  long long n_vars = 0;
  double wall_seconds = 0.0;
  std::vector<int> open_lines;  // 1-based line numbers
  // Not part of the table; go to the timing file.
  long long nodes = 0;
  long long iterations = 0;
  std::string status = "optimal";
};

struct EvaluationTable {
  std::vector<EvaluationRow> rows;
};

// Table CSV with the columns method, L_o, K, S, objective,
// out_of_sample_cost, infeasible_scenario_count, bound_gap_percent,
// n_rows, n_vars, open_lines, status. Wall time is left out so that reruns
// are byte-identical; it goes to timing_csv instead.
std::string table_csv(const EvaluationTable& table);
std::string timing_csv(const EvaluationTable& table);

// One-row CSV of a single solve: objective, open_lines, status, nodes.
// `line_numbers` are the 1-based numbers of the open lines.
std::string solve_csv(const SolveReport& report, std::span<const int> line_numbers);

// Writes text to path; throws IoError.
void write_text(const std::string& path, const std::string& text);

void write_csv_report(const EvaluationTable& table, const std::string& path);
void write_csv_report(const SolveReport& report, std::span<const int> line_numbers,
                      const std::string& path);

// RFC 4180 field quoting and the fixed number format (9 digits after the
// point).
std::string csv_field(const std::string& s);
std::string csv_number(double v);
std::string join_lines(std::span<const int> line_numbers);

}  // namespace ots
