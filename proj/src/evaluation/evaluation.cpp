#include "ots/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "ots/errors.hpp"

namespace ots {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string lower_status(SolveStatus s) {
  std::string out = to_string(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void finish(MethodResult& r, const Grid& grid, const UncertaintyPolytope* poly) {
  if (!r.optimal()) return;
  r.first_stage = extract_first_stage(grid, r.program, r.report);
  for (int e : r.first_stage->open_lines) r.open_lines.push_back(e + 1);
  if (r.method == Method::Ldr && poly != nullptr) {
    r.policy = extract_policy(r.program, r.report, *poly);
  }
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Det:
      return "det";
    case Method::Saa:
      return "saa";
    case Method::Ldr:
      return "ldr";
    case Method::DualLdr:
      return "dual-ldr";
    case Method::Oracle:
      return "oracle";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Det, Method::Saa, Method::Ldr, Method::DualLdr, Method::Oracle}) {
    if (method_name(m) == name) return m;
  }
  throw ValidationError("method", "unknown method '" + std::string(name) + "'");
}

EvaluationRow MethodResult::row(const Grid& grid) const {
  EvaluationRow r;
  r.method = method_name(method);
  r.max_open = max_open;
  r.K = grid.num_wind();
  r.objective = report.objective;
  r.n_rows = n_rows;
  r.n_vars = n_vars;
  r.wall_seconds = wall_seconds;
  r.open_lines = open_lines;
  r.nodes = report.nodes;
  r.iterations = report.iterations;
  r.status = lower_status(report.status);
  return r;
}

MethodResult run_method(Method method, const Grid& grid, const NetworkOperators& ops,
                        int max_open, const UncertaintyPolytope& poly,
                        const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  MethodResult r;
  r.method = method;
  r.max_open = max_open;
  auto monolithic = [&](MathProgram prog) {
    r.n_rows = prog.num_rows();
    r.n_vars = prog.num_vars();
    r.report = solve_milp(prog, options.cfg);
    r.program = std::move(prog);
  };
  auto generated = [&](ScenarioSolve s) {
    r.n_rows = s.full.counts.at("n_rows");
    r.n_vars = s.full.counts.at("n_vars_bin") + s.full.counts.at("n_vars_cont");
    r.report = std::move(s.report);
    r.program = std::move(s.program);
  };
  switch (method) {
    case Method::Det:
      monolithic(build_deterministic(grid, ops, max_open));
      break;
    case Method::Saa: {
      if (options.samples < 1) throw ValidationError("samples", "must be at least 1");
      const auto pts = sample(poly, options.samples, options.seed);
      generated(solve_saa(grid, ops, max_open, poly, pts, options.cfg));
      break;
    }
    case Method::Ldr:
      monolithic(build_primal_ldr(grid, ops, max_open, poly));
      break;
    case Method::DualLdr:
      monolithic(build_dual_ldr(grid, ops, max_open, poly));
      break;
    case Method::Oracle:
      generated(exact_vertex_oracle(grid, ops, max_open, poly, options.cfg));
      break;
  }
  finish(r, grid, &poly);
  r.wall_seconds = seconds_since(t0);
  return r;
}

OutOfSample out_of_sample(const Grid& grid, const NetworkOperators& ops,
                          const FirstStage& fs,
                          std::span<const Eigen::VectorXd> scenarios,
                          const SolverConfig& cfg) {
  OutOfSample out;
  double total = 0.0;
  Basis basis;
  for (const auto& xi : scenarios) {
    ++out.evaluated;
    if (!check_recourse(grid, ops, fs, xi, cfg, &basis).feasible) {
      ++out.infeasible;
      continue;
    }
    total += realized_cost(grid, fs, xi);
  }
  const int feasible = out.evaluated - out.infeasible;
  out.mean_cost = feasible > 0 ? total / feasible
                               : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<Eigen::VectorXd> out_of_sample_scenarios(const UncertaintyPolytope& poly,
                                                     int count, std::uint64_t seed) {
  constexpr std::uint64_t kStream = 0x9e3779b97f4a7c15ULL;
  return sample(poly, count, seed ^ kStream);
}

double gap_percent(double upper, double lower) {
  return 100.0 * (upper - lower) / std::max(std::abs(lower), 1e-9);
}

BoundGap bound_gap(const Grid& grid, const NetworkOperators& ops, int max_open,
                   const UncertaintyPolytope& poly, const RunOptions& options,
                   int oracle_max_dim) {
  BoundGap out{run_method(Method::Ldr, grid, ops, max_open, poly, options),
               run_method(Method::DualLdr, grid, ops, max_open, poly, options),
               std::nullopt, std::nullopt};
  if (poly.box() && poly.dim() <= oracle_max_dim) {
    out.oracle = run_method(Method::Oracle, grid, ops, max_open, poly, options);
  }
  if (out.upper.optimal() && out.lower.optimal()) {
    out.gap = gap_percent(out.upper.report.objective, out.lower.report.objective);
  }
  return out;
}

EvaluationTable scaling_benchmark(const Grid& grid, const NetworkOperators& ops,
                                  int max_open, const UncertaintyPolytope& poly,
                                  const BenchOptions& options) {
  EvaluationTable table;
  SolverConfig limited = options.cfg;
  limited.time_limit_seconds = options.saa_time_limit;
  int previous = 0;
  for (int s : options.s_list) {
    if (s < 1 || s <= previous) {
      throw ValidationError("s_list", "sample counts must be positive and ascending");
    }
    previous = s;
    const auto pts = sample(poly, s, options.seed);

    const auto t0 = std::chrono::steady_clock::now();
    MethodResult mono;
    mono.method = Method::Saa;
    mono.max_open = max_open;
    mono.program = build_saa(grid, ops, max_open, poly, pts);
    mono.n_rows = mono.program.num_rows();
    mono.n_vars = mono.program.num_vars();
    mono.report = solve_milp(mono.program, limited);
    finish(mono, grid, nullptr);
    mono.wall_seconds = seconds_since(t0);
    EvaluationRow row = mono.row(grid);
    row.samples = s;
    table.rows.push_back(std::move(row));

    if (options.with_generation) {
      RunOptions ro{s, options.seed, options.cfg};
      EvaluationRow g = run_method(Method::Saa, grid, ops, max_open, poly, ro).row(grid);
      g.method = "saa-gen";
      g.samples = s;
      table.rows.push_back(std::move(g));
    }
  }
  RunOptions ro;
  ro.cfg = options.cfg;
  table.rows.push_back(run_method(Method::Ldr, grid, ops, max_open, poly, ro).row(grid));
  return table;
}

bool rows_affine_in_samples(const EvaluationTable& table, const std::string& method) {
  std::vector<std::pair<long long, long long>> pts;
  for (const auto& r : table.rows) {
    if (r.method == method && r.samples) pts.emplace_back(*r.samples, r.n_rows);
  }
  if (pts.size() < 2) return true;
  const auto [s0, n0] = pts[0];
  const auto [s1, n1] = pts[1];
  for (const auto& [s, n] : pts) {
    // (n - n0)(s1 - s0) == (n1 - n0)(s - s0)
    if ((n - n0) * (s1 - s0) != (n1 - n0) * (s - s0)) return false;
  }
  return true;
}

std::string ldr_time_table_csv(const EvaluationTable& table) {
  std::map<int, std::map<int, double>> cell;  // L_o -> K -> seconds
  std::map<int, bool> ks;
  for (const auto& r : table.rows) {
    if (r.method != "ldr") continue;
    cell[r.max_open][r.K] = r.wall_seconds;
    ks[r.K] = true;
  }
  std::string out = "L_o";
  for (const auto& [k, unused] : ks) out += ",K=" + std::to_string(k);
  out += "\r\n";
  for (const auto& [lo, row] : cell) {
    out += std::to_string(lo);
    for (const auto& [k, unused] : ks) {
      out += ',';
      auto it = row.find(k);
      if (it != row.end()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", it->second);
        out += buf;
      }
    }
    out += "\r\n";
  }
  return out;
}

}  // namespace ots
