// Acceptance run: one PASS/FAIL line per criterion. Arguments select
// criteria by number (default: all).
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "../fixtures.hpp"
#include "ots/case_io.hpp"
#include "ots/cli.hpp"
#include "ots/errors.hpp"
#include "ots/evaluation.hpp"

using namespace ots;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kMilpRelTol = 1e-6;
constexpr double kMilpSeconds = 60.0;
constexpr double kRobustTol = 1e-8;
constexpr double kSandwichTol = 1e-6;
constexpr double kLegSeconds = 120.0;
constexpr double kPolicyTol = 1e-8;
constexpr double kDeviationPercent = 5.0;
constexpr double kCollapseTol = 1e-8;
constexpr double kGapFloor = -1e-4;
constexpr std::uint64_t kSeed = 1;
constexpr int kSaaSamples = 500;
constexpr double kBenchSaaLimit = 60.0;
constexpr int kBenchMaxOpen = 2;
// The 118-bus oracle takes several times the bound solves; skipped here.
constexpr int k118OracleMaxDim = 0;

const std::string kData = OTS_DATA_DIR;

struct Result {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << "[" << why << "] ";
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct Instance {
  Grid grid;
  NetworkOperators ops;
  UncertaintyPolytope poly;
};

Instance make_instance(const CaseFile& c) {
  Grid g = make_grid(c);
  NetworkOperators ops = build_operators(g);
  UncertaintyPolytope poly = wind_support(g);
  return {std::move(g), std::move(ops), std::move(poly)};
}

// Solves are proven optimal to round-off here so that sandwich checks at
// kSandwichTol are meaningful.
SolverConfig exact_config() {
  SolverConfig cfg;
  cfg.mip_gap = 0.0;
  cfg.mip_gap_abs = 1e-9;
  return cfg;
}

// 14-bus results shared by criteria 3 to 5.
class Case14 {
 public:
  Case14() : inst_(make_instance(load_case(kData + "/case14_wind.json"))) {}
  const Instance& inst() const { return inst_; }
  const MethodResult& get(Method m, int max_open) {
    auto key = std::make_pair(m, max_open);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      RunOptions ro{kSaaSamples, kSeed, exact_config()};
      it = cache_.emplace(key, run_method(m, inst_.grid, inst_.ops, max_open, inst_.poly, ro))
               .first;
    }
    return it->second;
  }

 private:
  Instance inst_;
  std::map<std::pair<Method, int>, MethodResult> cache_;
};

Case14& case14() {
  static Case14 c;
  return c;
}

// 1. B&B against enumeration.
void criterion1(Result& res) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  int checked = 0, optimal = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    testing::RandomCaseOptions opt;
    opt.max_buses = 8;
    opt.max_lines = 12;
    opt.reserves = trial % 2 == 1;
    opt.wind = trial % 2 == 1 ? 1 + trial % 3 : 0;
    opt.wind_width = 0.2;
    const auto inst = make_instance(testing::random_case(rng, opt));
    const int lo = 1 + trial % 2;
    const MathProgram prog = opt.wind == 0
                                 ? build_deterministic(inst.grid, inst.ops, lo)
                                 : build_primal_ldr(inst.grid, inst.ops, lo, inst.poly);
    const auto a = solve_milp(prog);
    const auto b = enumerate_milp(prog, lo);
    ++checked;
    if (a.status != b.status) {
      res.fail("status differs on grid " + std::to_string(trial));
      continue;
    }
    if (a.status != SolveStatus::Optimal) continue;
    ++optimal;
    const double rel = std::abs(a.objective - b.objective) / std::max(1.0, std::abs(b.objective));
    worst = std::max(worst, rel);
    if (rel > kMilpRelTol) res.fail("objective differs on grid " + std::to_string(trial));
  }
  const double secs = seconds_since(t0);
  if (secs >= kMilpSeconds) res.fail("too slow");
  if (optimal < 15) res.fail("too few feasible grids");
  res.detail << checked << " grids (" << optimal << " optimal), worst rel diff " << fmt(worst)
             << ", " << fmt(secs, "%.1f") << " s";
}

// Worst case of a'xi over {S xi <= t} by enumerating vertices (d = 2, 3).
double vertex_max(const Eigen::MatrixXd& S, const Eigen::VectorXd& t, const Eigen::VectorXd& a) {
  const int m = static_cast<int>(S.rows());
  const int d = static_cast<int>(S.cols());
  double best = -kInf;
  std::vector<int> pick(d);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == d) {
      Eigen::MatrixXd A(d, d);
      Eigen::VectorXd b(d);
      for (int k = 0; k < d; ++k) {
        A.row(k) = S.row(pick[k]);
        b[k] = t[pick[k]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.rank() < d) return;
      const Eigen::VectorXd v = lu.solve(b);
      if (((S * v - t).array() > 1e-9).any()) return;
      best = std::max(best, a.dot(v));
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// 2. Robustified rows against the worst case.
void criterion2(Result& res) {
  Rng rng(202);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); };
  double worst_vertex = 0.0, worst_lp = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 2;
    Eigen::VectorXd lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      lo[k] = u(-2.0, 0.0);
      hi[k] = lo[k] + u(0.1, 3.0);
    }
    Eigen::MatrixXd S(2 * d, d);
    S << Eigen::MatrixXd::Identity(d, d), -Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd t(2 * d);
    t << hi, -lo;
    const Eigen::VectorXd center = 0.5 * (lo + hi);
    if (trial % 4 >= 2) {
      // Cut the box with random halfspaces that keep the center inside.
      const int cuts = 1 + trial % 3;
      S.conservativeResize(2 * d + cuts, d);
      t.conservativeResize(2 * d + cuts);
      for (int c = 0; c < cuts; ++c) {
        Eigen::VectorXd a(d);
        for (int k = 0; k < d; ++k) a[k] = u(-1.0, 1.0);
        S.row(2 * d + c) = a.transpose();
        t[2 * d + c] = a.dot(center) + u(0.05, 0.5);
      }
    }
    const auto poly = UncertaintyPolytope::from_halfspaces(S, t, center);

    // const(x) - r + coeff(x)'xi <= 0 with x fixed and r free: min r is
    // the worst case at x.
    MathProgram p;
    const int nx = 3;
    const VarBlock x = p.add_block("x", nx, 0.0, 0.0);
    Eigen::VectorXd x0(nx);
    for (int j = 0; j < nx; ++j) {
      x0[j] = u(-1.0, 1.0);
      p.set_var_bounds(x.at(j), x0[j], x0[j]);
    }
    const VarBlock r = p.add_block("r", 1, -kInf, kInf);
    UncertainRow row;
    double const_val = u(-1.0, 1.0);
    row.constant = LinearExpr(const_val);
    row.constant.add(r.at(0), -1.0);
    Eigen::VectorXd a(d);
    for (int k = 0; k < d; ++k) {
      LinearExpr e(u(-2.0, 2.0));
      a[k] = e.constant();
      for (int j = 0; j < nx; ++j) {
        const double w = rng.uniform01() < 0.5 ? 0.0 : u(-1.0, 1.0);
        e.add(x.at(j), w);
        a[k] += w * x0[j];
      }
      row.coeff.push_back(e);
    }
    for (int j = 0; j < nx; ++j) {
      const double w = u(-1.0, 1.0);
      row.constant.add(x.at(j), w);
      const_val += w * x0[j];
    }
    row.rhs = 0.0;
    row.name = "robust";
    const UncertainRow rows[] = {row};
    robustify_le(p, rows, poly, "alpha");
    p.set_objective(LinearExpr::variable(r.at(0)));
    const auto rep = solve_lp(p);
    if (rep.status != SolveStatus::Optimal) {
      res.fail("LP not optimal on row " + std::to_string(trial));
      continue;
    }
    const double by_vertex = const_val + vertex_max(S, t, a);
    const double by_lp = const_val + support_max(poly, a);
    worst_vertex = std::max(worst_vertex, std::abs(rep.objective - by_vertex));
    worst_lp = std::max(worst_lp, std::abs(rep.objective - by_lp));
  }
  if (worst_vertex > kRobustTol || worst_lp > kRobustTol) res.fail("worst case mismatch");
  res.detail << "200 rows, max |dualized - vertex worst case| " << fmt(worst_vertex)
             << ", max |dualized - LP worst case| " << fmt(worst_lp);
}

bool sandwich(Result& res, const std::string& label, const MethodResult& up,
              const MethodResult& dn, const MethodResult& ex) {
  for (const auto* r : {&up, &dn, &ex}) {
    if (r->wall_seconds >= kLegSeconds) res.fail(label + " " + method_name(r->method) + " too slow");
  }
  if (!ex.optimal()) {
    // An infeasible exact problem must be infeasible for the upper bound too.
    if (ex.report.status == SolveStatus::Infeasible && up.optimal()) {
      res.fail(label + ": oracle infeasible, primal LDR feasible");
    }
    return false;
  }
  if (!dn.optimal()) {
    res.fail(label + ": dual LDR " + to_string(dn.report.status));
    return false;
  }
  const double lb = dn.report.objective, ex_v = ex.report.objective;
  if (lb - kSandwichTol > ex_v) res.fail(label + ": lower bound above oracle");
  if (up.optimal() && ex_v > up.report.objective + kSandwichTol) {
    res.fail(label + ": oracle above upper bound");
  }
  return true;
}

// 3. dual LDR <= oracle <= primal LDR.
void criterion3(Result& res) {
  auto& c = case14();
  double slowest = 0.0;
  for (int lo = 1; lo <= 4; ++lo) {
    const auto& up = c.get(Method::Ldr, lo);
    const auto& dn = c.get(Method::DualLdr, lo);
    const auto& ex = c.get(Method::Oracle, lo);
    for (const auto* r : {&up, &dn, &ex}) slowest = std::max(slowest, r->wall_seconds);
    if (!sandwich(res, "14-bus L_o=" + std::to_string(lo), up, dn, ex)) {
      res.fail("14-bus L_o=" + std::to_string(lo) + " not solved");
    }
    res.detail << "L_o=" << lo << ": " << fmt(dn.report.objective, "%.4f") << " <= "
               << fmt(ex.report.objective, "%.4f") << " <= " << fmt(up.report.objective, "%.4f")
               << "; ";
  }
  Rng rng(303);
  int sandwiched = 0;
  for (int trial = 0; trial < 20; ++trial) {
    testing::RandomCaseOptions opt;
    opt.max_buses = 8;
    opt.max_lines = 12;
    opt.reserves = true;
    opt.wind = 1 + trial % 4;
    opt.wind_width = 0.1 + 0.1 * (trial % 3);
    const auto inst = make_instance(testing::random_case(rng, opt));
    const int lo = 1 + trial % 2;
    RunOptions ro;
    ro.cfg = exact_config();
    const auto up = run_method(Method::Ldr, inst.grid, inst.ops, lo, inst.poly, ro);
    const auto dn = run_method(Method::DualLdr, inst.grid, inst.ops, lo, inst.poly, ro);
    const auto ex = run_method(Method::Oracle, inst.grid, inst.ops, lo, inst.poly, ro);
    for (const auto* r : {&up, &dn, &ex}) slowest = std::max(slowest, r->wall_seconds);
    sandwiched += sandwich(res, "random " + std::to_string(trial), up, dn, ex);
  }
  if (sandwiched < 10) res.fail("too few feasible random cases");
  res.detail << "random: " << sandwiched << "/20 feasible and sandwiched; slowest leg "
             << fmt(slowest, "%.1f") << " s";
}

// 4. The primal LDR policy is feasible on vertices and samples.
void criterion4(Result& res) {
  auto& c = case14();
  const auto& inst = c.inst();
  const auto corners = vertices(inst.poly);
  const auto pts = sample(inst.poly, 1000, kSeed);
  for (int lo = 1; lo <= 4; ++lo) {
    const auto& r = c.get(Method::Ldr, lo);
    if (!r.optimal() || !r.policy) {
      res.fail("LDR not solved at L_o=" + std::to_string(lo));
      continue;
    }
    int violations = 0;
    double worst = 0.0;
    for (const auto* set : {&corners, &pts}) {
      for (const auto& xi : *set) {
        const double v = policy_violation(inst.grid, inst.ops, *r.first_stage, *r.policy, xi);
        worst = std::max(worst, v);
        violations += v > kPolicyTol;
      }
    }
    if (violations > 0) res.fail("violations at L_o=" + std::to_string(lo));
    res.detail << "L_o=" << lo << ": " << corners.size() << " vertices + " << pts.size()
               << " samples, " << violations << " violations (worst " << fmt(worst) << "); ";
  }
}

// 5. LDR and SAA choose the same lines.
void criterion5(Result& res) {
  auto& c = case14();
  const auto& inst = c.inst();
  const auto fresh = out_of_sample_scenarios(inst.poly, 1000, kSeed);
  bool same_all = true;
  bool deviation_ok = true;
  for (int lo = 1; lo <= 4; ++lo) {
    const auto& ldr = c.get(Method::Ldr, lo);
    const auto& saa = c.get(Method::Saa, lo);
    if (!ldr.optimal() || !saa.optimal()) {
      res.fail("not solved at L_o=" + std::to_string(lo));
      continue;
    }
    const bool same = ldr.open_lines == saa.open_lines;
    same_all = same_all && same;
    const auto ol = out_of_sample(inst.grid, inst.ops, *ldr.first_stage, fresh);
    const auto os = out_of_sample(inst.grid, inst.ops, *saa.first_stage, fresh);
    const double dev = 100.0 * (ol.mean_cost - os.mean_cost) / std::abs(os.mean_cost);
    deviation_ok = deviation_ok && std::abs(dev) <= kDeviationPercent;
    res.detail << "L_o=" << lo << ": LDR [" << join_lines(ldr.open_lines) << "] SAA ["
               << join_lines(saa.open_lines) << "] oos dev " << fmt(dev, "%.3f") << "% (SAA "
               << os.infeasible << " infeasible); ";
  }
  if (!same_all) {
    res.detail << "open sets differ, fallback on deviation; ";
    if (!deviation_ok) res.fail("open sets differ and deviation above threshold");
  }
}

// 6. SAA grows with S, LDR does not, and LDR is faster at S = 500.
void criterion6(Result& res) {
  const auto& inst = case14().inst();
  BenchOptions bo;
  bo.s_list = {1, 10, 50, 100, 500};
  bo.seed = kSeed;
  bo.saa_time_limit = kBenchSaaLimit;
  const auto table = scaling_benchmark(inst.grid, inst.ops, kBenchMaxOpen, inst.poly, bo);
  if (!rows_affine_in_samples(table, "saa")) res.fail("SAA rows not affine in S");
  const auto ldr_rows = build_primal_ldr(inst.grid, inst.ops, kBenchMaxOpen, inst.poly).num_rows();
  double ldr_time = 0.0, saa500 = 0.0, gen500 = 0.0;
  std::string saa500_status;
  for (const auto& r : table.rows) {
    if (r.method == "ldr") {
      ldr_time = r.wall_seconds;
      if (r.n_rows != ldr_rows) res.fail("LDR row count changed");
    }
    if (r.samples == 500 && r.method == "saa") {
      saa500 = r.wall_seconds;
      saa500_status = r.status;
    }
    if (r.samples == 500 && r.method == "saa-gen") gen500 = r.wall_seconds;
    if (r.method == "saa") {
      res.detail << "S=" << *r.samples << " rows=" << r.n_rows << " t=" << fmt(r.wall_seconds, "%.1f")
                 << "s (" << r.status << "); ";
    }
  }
  if (!(ldr_time < saa500)) res.fail("LDR not faster than SAA at S=500");
  res.detail << "LDR rows=" << ldr_rows << " t=" << fmt(ldr_time, "%.1f")
             << "s; SAA S=500 " << fmt(saa500, "%.1f") << "s (" << saa500_status
             << "); scenario-generation SAA S=500 " << fmt(gen500, "%.1f") << "s";
}

// 7. Zero-width support collapses every method to the deterministic value.
void criterion7(Result& res) {
  Rng rng(707);
  int checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 40 && checked < 10; ++trial) {
    testing::RandomCaseOptions opt;
    opt.reserves = true;
    opt.wind = 1 + trial % 3;
    opt.wind_width = 0.0;
    const auto inst = make_instance(testing::random_case(rng, opt));
    RunOptions ro;
    ro.samples = 10;
    const auto det = run_method(Method::Det, inst.grid, inst.ops, 1, inst.poly, ro);
    if (!det.optimal()) continue;
    ++checked;
    for (Method m : {Method::Saa, Method::Ldr, Method::DualLdr, Method::Oracle}) {
      const auto r = run_method(m, inst.grid, inst.ops, 1, inst.poly, ro);
      if (!r.optimal()) {
        res.fail(method_name(m) + " not optimal");
        continue;
      }
      const double diff = std::abs(r.report.objective - det.report.objective);
      worst = std::max(worst, diff);
      if (diff > kCollapseTol) res.fail(method_name(m) + " differs from det");
    }
  }
  if (checked < 10) res.fail("fewer than 10 feasible cases");
  res.detail << checked << " cases, max |objective - det| " << fmt(worst);
}

// 8. Bounds on the 118-bus case.
void criterion8(Result& res) {
  const auto inst = make_instance(load_case(kData + "/case118_wind.json"));
  EvaluationTable table;
  for (int lo = 1; lo <= 4; ++lo) {
    const auto b = bound_gap(inst.grid, inst.ops, lo, inst.poly, {}, k118OracleMaxDim);
    table.rows.push_back(b.upper.row(inst.grid));
    table.rows.push_back(b.lower.row(inst.grid));
    if (!b.gap) {
      res.fail("L_o=" + std::to_string(lo) + " bounds not solved");
      continue;
    }
    if (*b.gap < kGapFloor) res.fail("negative gap at L_o=" + std::to_string(lo));
    res.detail << "L_o=" << lo << " UB=" << fmt(b.upper.report.objective, "%.3f")
               << " LB=" << fmt(b.lower.report.objective, "%.3f")
               << " gap=" << fmt(*b.gap, "%.4f") << "%";
    if (b.oracle && b.oracle->optimal()) {
      res.detail << " oracle=" << fmt(b.oracle->report.objective, "%.3f");
    }
    res.detail << "; ";
  }
  std::string times = ldr_time_table_csv(table);
  std::erase(times, '\r');
  res.detail << "\nprimal LDR run time (s), K=" << inst.grid.num_wind() << ":\n" << times;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9. Reruns produce identical CSV files.
void criterion9(Result& res) {
  const fs::path dir = fs::temp_directory_path() / "ots_acceptance_9";
  fs::create_directories(dir);
  const std::string c14 = kData + "/case14_wind.json";
  const std::vector<std::pair<std::string, std::vector<std::string>>> cmds = {
      {"solve", {"solve", "--method", "saa", "--case", c14, "--max-open", "2", "--samples", "200",
                 "--seed", "7"}},
      {"evaluate", {"evaluate", "--case", c14, "--methods", "det,saa,ldr", "--max-open", "1",
                    "--samples", "100", "--oos-samples", "500", "--seed", "7"}},
      {"gap", {"gap", "--case", c14, "--max-open", "1"}},
      {"bench", {"bench", "--case", c14, "--max-open", "1", "--s-list", "1,10,20"}},
  };
  for (const auto& [name, args] : cmds) {
    std::string first;
    for (int run = 0; run < 2; ++run) {
      const std::string out = (dir / (name + std::to_string(run) + ".csv")).string();
      auto full = args;
      full.push_back("--out");
      full.push_back(out);
      std::ostringstream o, e;
      if (run_cli(full, o, e) != 0) {
        res.fail(name + " failed: " + e.str());
        break;
      }
      if (run == 0) {
        first = slurp(out);
      } else if (slurp(out) != first || first.empty()) {
        res.fail(name + " output differs");
      }
    }
    res.detail << name << " " << (res.pass ? "identical" : "checked") << "; ";
  }
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<void(Result&)>> all = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  std::set<int> which;
  for (int i = 1; i < argc; ++i) which.insert(std::stoi(argv[i]));
  if (which.empty()) {
    for (const auto& [k, f] : all) which.insert(k);
  }
  int failed = 0;
  for (int k : which) {
    Result res;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      all.at(k)(res);
    } catch (const std::exception& e) {
      res.fail(std::string("exception: ") + e.what());
    }
    failed += !res.pass;
    std::printf("criterion %d: %s (%.1f s) %s\n", k, res.pass ? "PASS" : "FAIL",
                seconds_since(t0), res.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
