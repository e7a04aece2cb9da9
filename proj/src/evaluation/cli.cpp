#include "ots/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "ots/case_io.hpp"
#include "ots/errors.hpp"
#include "ots/evaluation.hpp"
#include "ots/program_io.hpp"
#include "ots/report.hpp"

namespace ots {
namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;

struct Common {
  std::string case_path;
  std::string config_path;
  std::string out;
  std::vector<int> max_open;
  int samples = 500;
  std::uint64_t seed = 1;
};

struct Loaded {
  Grid grid;
  NetworkOperators ops;
  UncertaintyPolytope poly;
  SolverConfig cfg;
  std::vector<int> max_open;
};

Loaded load(const Common& c) {
  Grid grid = make_grid(load_case(c.case_path));
  NetworkOperators ops = build_operators(grid);
  UncertaintyPolytope poly = wind_support(grid);
  SolverConfig cfg =
      c.config_path.empty() ? solver_config_from_env() : load_solver_config(c.config_path);
  std::vector<int> lo = c.max_open;
  if (lo.empty()) lo = {grid.max_open > 0 ? grid.max_open : 1};
  for (int v : lo) {
    if (v < 0) throw ValidationError("max-open", "must be nonnegative");
  }
  return {std::move(grid), std::move(ops), std::move(poly), cfg, std::move(lo)};
}

// out.csv -> out.<tag>.csv
std::string sidecar(const std::string& path, const std::string& tag) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + "." + tag + ".csv";
  }
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

void emit_table(const EvaluationTable& table, const std::string& out_path,
                std::ostream& out) {
  if (out_path.empty()) {
    out << table_csv(table);
    return;
  }
  write_text(out_path, table_csv(table));
  write_text(sidecar(out_path, "timing"), timing_csv(table));
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void summary(std::ostream& out, const EvaluationRow& r) {
  out << r.method << " L_o=" << r.max_open << " K=" << r.K;
  if (r.samples) out << " S=" << *r.samples;
  out << " status=" << r.status << " objective=" << fmt(r.objective)
      << " open=[" << join_lines(r.open_lines) << "] rows=" << r.n_rows
      << " vars=" << r.n_vars << " nodes=" << r.nodes
      << " time=" << fmt(r.wall_seconds, "%.2f") << "s\n";
}

void add_common(CLI::App* cmd, Common& c, bool samples) {
  cmd->add_option("--case", c.case_path, "case file (JSON)")->required();
  cmd->add_option("--config", c.config_path,
                  "solver config (JSON); defaults to $OTS_LDR_CONFIG");
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--seed", c.seed, "random seed");
  if (samples) cmd->add_option("--samples", c.samples, "SAA sample count");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"optimal transmission switching under wind uncertainty"};
  app.require_subcommand(1);

  Common c;
  std::string method = "ldr";
  std::vector<std::string> methods = {"det", "saa", "ldr"};
  int oos_samples = 1000;
  int oracle_max_dim = 10;
  std::vector<int> s_list = {1, 10, 50, 100, 500};
  double saa_time_limit = 60.0;
  bool no_generation = false;
  std::string solution_path;

  auto* solve = app.add_subcommand("solve", "solve one model and write a one-row CSV");
  add_common(solve, c, true);
  solve->add_option("--method", method, "det|saa|ldr|dual-ldr|oracle");
  solve->add_option("--max-open", c.max_open, "at most this many open lines")
      ->expected(1);

  auto* evaluate = app.add_subcommand("evaluate", "out-of-sample cost table");
  add_common(evaluate, c, true);
  evaluate->add_option("--methods", methods, "comma separated")->delimiter(',');
  evaluate->add_option("--max-open", c.max_open, "comma separated")->delimiter(',');
  evaluate->add_option("--oos-samples", oos_samples, "fresh scenarios per method");

  auto* gap = app.add_subcommand("gap", "primal/dual LDR bounds and the vertex oracle");
  add_common(gap, c, false);
  gap->add_option("--max-open", c.max_open, "comma separated")->delimiter(',');
  gap->add_option("--oracle-max-dim", oracle_max_dim,
                  "run the oracle up to this many uncertain coordinates");

  auto* bench = app.add_subcommand("bench", "SAA size and time against the sample count");
  add_common(bench, c, false);
  bench->add_option("--max-open", c.max_open, "at most this many open lines")
      ->expected(1);
  bench->add_option("--s-list", s_list, "comma separated, ascending")->delimiter(',');
  bench->add_option("--saa-time-limit", saa_time_limit,
                    "seconds per monolithic SAA solve (0: none)");
  bench->add_flag("--no-generation", no_generation, "skip scenario-generation SAA rows");

  auto* mps = app.add_subcommand("export-mps", "write the program in MPS format");
  add_common(mps, c, true);
  mps->add_option("--method", method, "det|saa|ldr|dual-ldr|oracle");
  mps->add_option("--max-open", c.max_open, "at most this many open lines")->expected(1);

  auto* check = app.add_subcommand("check-solution",
                                   "evaluate an external name,value solution");
  add_common(check, c, true);
  check->add_option("--method", method, "det|saa|ldr|dual-ldr|oracle");
  check->add_option("--max-open", c.max_open, "at most this many open lines")
      ->expected(1);
  check->add_option("--solution", solution_path, "CSV with columns name,value")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    Loaded L = load(c);
    RunOptions ro{c.samples, c.seed, L.cfg};

    if (solve->parsed()) {
      const auto r = run_method(parse_method(method), L.grid, L.ops, L.max_open[0], L.poly, ro);
      EvaluationRow row = r.row(L.grid);
      if (r.method == Method::Saa) row.samples = c.samples;
      summary(out, row);
      if (!c.out.empty()) write_csv_report(r.report, r.open_lines, c.out);
      if (!r.optimal()) {
        err << "solve failed: " << row.status << "\n";
        return kExitSolver;
      }
      return 0;
    }

    if (evaluate->parsed()) {
      std::vector<Method> ms;
      for (const auto& m : methods) ms.push_back(parse_method(m));
      if (oos_samples < 1) throw ValidationError("oos-samples", "must be at least 1");
      const auto fresh = out_of_sample_scenarios(L.poly, oos_samples, c.seed);
      EvaluationTable table;
      for (int lo : L.max_open) {
        for (Method m : ms) {
          const auto r = run_method(m, L.grid, L.ops, lo, L.poly, ro);
          EvaluationRow row = r.row(L.grid);
          if (m == Method::Saa) row.samples = c.samples;
          if (r.first_stage) {
            const auto o = out_of_sample(L.grid, L.ops, *r.first_stage, fresh, L.cfg);
            row.out_of_sample_cost = o.mean_cost;
            row.infeasible_scenario_count = o.infeasible;
          }
          summary(out, row);
          table.rows.push_back(std::move(row));
        }
      }
      emit_table(table, c.out, out);
      return 0;
    }

    if (gap->parsed()) {
      EvaluationTable table;
      if (c.max_open.empty()) L.max_open = {1, 2, 3, 4};
      for (int lo : L.max_open) {
        const auto b = bound_gap(L.grid, L.ops, lo, L.poly, ro, oracle_max_dim);
        EvaluationRow up = b.upper.row(L.grid);
        EvaluationRow dn = b.lower.row(L.grid);
        up.bound_gap_percent = b.gap;
        dn.bound_gap_percent = b.gap;
        for (auto* row : {&up, &dn}) summary(out, *row);
        table.rows.push_back(std::move(up));
        table.rows.push_back(std::move(dn));
        if (b.oracle) {
          EvaluationRow o = b.oracle->row(L.grid);
          summary(out, o);
          table.rows.push_back(std::move(o));
        }
        if (b.gap) out << "gap L_o=" << lo << " " << fmt(*b.gap, "%.6f") << "%\n";
      }
      const std::string times = ldr_time_table_csv(table);
      out << "primal LDR run time (s)\n" << times;
      emit_table(table, c.out, out);
      if (!c.out.empty()) write_text(sidecar(c.out, "ldr_times"), times);
      return 0;
    }

    if (bench->parsed()) {
      BenchOptions bo;
      bo.s_list = s_list;
      bo.seed = c.seed;
      bo.cfg = L.cfg;
      bo.saa_time_limit = saa_time_limit;
      bo.with_generation = !no_generation;
      const auto table = scaling_benchmark(L.grid, L.ops, L.max_open[0], L.poly, bo);
      for (const auto& row : table.rows) summary(out, row);
      out << "saa rows affine in S: "
          << (rows_affine_in_samples(table, "saa") ? "yes" : "no") << "\n";
      emit_table(table, c.out, out);
      return 0;
    }

    // export-mps and check-solution need the program itself.
    const Method m = parse_method(method);
    const int lo = L.max_open[0];
    MathProgram prog;
    switch (m) {
      case Method::Det:
        prog = build_deterministic(L.grid, L.ops, lo);
        break;
      case Method::Saa:
        prog = build_saa(L.grid, L.ops, lo, L.poly, sample(L.poly, c.samples, c.seed));
        break;
      case Method::Ldr:
        prog = build_primal_ldr(L.grid, L.ops, lo, L.poly);
        break;
      case Method::DualLdr:
        prog = build_dual_ldr(L.grid, L.ops, lo, L.poly);
        break;
      case Method::Oracle:
        prog = build_vertex_oracle(L.grid, L.ops, lo, L.poly);
        break;
    }
    if (mps->parsed()) {
      const std::string text = export_program(prog);
      if (c.out.empty()) {
        out << text;
      } else {
        write_text(c.out, text);
        out << "wrote " << c.out << ": " << prog.num_rows() << " rows, "
            << prog.num_vars() << " columns, " << prog.num_binaries() << " binary\n";
      }
      return 0;
    }
    std::ifstream in(solution_path);
    if (!in) throw IoError("cannot open solution file '" + solution_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto x = import_solution(prog, buf.str());
    out << "objective=" << fmt(prog.objective_value(x), "%.9f")
        << " max_violation=" << fmt(prog.max_violation(x), "%.3e") << "\n";
    return 0;
  } catch (const ValidationFailure& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace ots
