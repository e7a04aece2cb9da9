#include "ots/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "ots/errors.hpp"
#include "solver/simplex.hpp"

namespace ots {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> binary_columns(const MathProgram& prog) {
  std::vector<int> cols;
  for (int j = 0; j < prog.num_vars(); ++j) {
    if (prog.var_kind(j) == VarKind::Binary) cols.push_back(j);
  }
  return cols;
}

void fill_rows(const MathProgram& prog, SolveReport& rep) {
  rep.objective = prog.objective_value(rep.x);
  rep.row_activity.resize(prog.num_rows());
  for (int i = 0; i < prog.num_rows(); ++i) {
    rep.row_activity[i] = prog.row_activity(i, rep.x);
  }
}

double tie_tolerance(double incumbent) {
  return 1e-9 * std::max(1.0, std::abs(incumbent));
}

// Incumbent bookkeeping shared by branch and bound and enumeration.
struct Incumbent {
  bool found = false;
  double objective = kInf;
  std::vector<double> x;
  std::vector<int> open;

  // Accepts a strictly better objective, or an equal one with a
  // lexicographically smaller open set.
  bool offer(double obj, const std::vector<double>& xs,
             const std::vector<int>& open_set) {
    if (found) {
      const double tie = tie_tolerance(objective);
      if (obj > objective + tie) return false;
      if (obj >= objective - tie && !open_set_less(open_set, open)) {
        return false;
      }
    }
    found = true;
    objective = obj;
    x = xs;
    open = open_set;
    return true;
  }
};

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::Unbounded:
      return "Unbounded";
    case SolveStatus::IterLimit:
      return "IterLimit";
    case SolveStatus::TimeLimit:
      return "TimeLimit";
    case SolveStatus::NodeLimit:
      return "NodeLimit";
    case SolveStatus::NumericalError:
      break;
  }
  return "NumericalError";
}

std::vector<double> SolveReport::block_values(const MathProgram& prog,
                                              const std::string& name) const {
  const VarBlock& b = prog.block(name);
  if (x.empty()) return {};
  return {x.begin() + b.first, x.begin() + b.first + b.size()};
}

std::vector<int> SolveReport::open_lines(const MathProgram& prog) const {
  std::vector<int> open;
  const VarBlock* z = prog.find_block("z");
  if (z == nullptr || x.empty()) return open;
  for (int k = 0; k < z->size(); ++k) {
    if (x[z->first + k] < 0.5) open.push_back(k);
  }
  return open;
}

bool open_set_less(std::span<const int> a, std::span<const int> b) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++i;
      ++j;
    } else {
      return b[j] < a[i];
    }
  }
  return i == a.size() && j < b.size();
}

double farkas_gap(const MathProgram& prog, std::span<const double> y) {
  std::vector<double> coef(prog.num_vars(), 0.0);
  double lo2 = 0.0;
  double hi2 = 0.0;
  for (int i = 0; i < prog.num_rows(); ++i) {
    const double v = y[i];
    if (v == 0.0) continue;
    auto idx = prog.row_indices(i);
    auto val = prog.row_values(i);
    for (std::size_t k = 0; k < idx.size(); ++k) coef[idx[k]] += v * val[k];
    const double a = v * prog.row_lower(i);
    const double b = v * prog.row_upper(i);
    lo2 += std::min(a, b);
    hi2 += std::max(a, b);
  }
  double scale = 0.0;
  for (double c : coef) scale = std::max(scale, std::abs(c));
  double lo1 = 0.0;
  double hi1 = 0.0;
  for (int j = 0; j < prog.num_vars(); ++j) {
    const double c = coef[j];
    if (c == 0.0) continue;
    // Cancellation noise against an infinite bound is not evidence.
    const bool unbounded = prog.var_lower(j) == -kInf || prog.var_upper(j) == kInf;
    if (unbounded && std::abs(c) <= 1e-9 * scale) continue;
    const double a = c * prog.var_lower(j);
    const double b = c * prog.var_upper(j);
    lo1 += std::min(a, b);
    hi1 += std::max(a, b);
  }
  return std::max(lo1 - hi2, lo2 - hi1);
}

SolveReport solve_lp(const MathProgram& prog, const SolverConfig& cfg,
                     const Basis* warm_start) {
  const auto t0 = Clock::now();
  detail::LpEngine eng(prog, cfg);
  if (warm_start != nullptr) eng.set_basis(*warm_start);
  SolveReport rep;
  rep.status = eng.solve();
  rep.iterations = eng.iterations();
  rep.message = eng.message();
  rep.basis = eng.basis();
  rep.nodes = 1;
  if (rep.status == SolveStatus::Optimal) {
    rep.x = eng.primal();
    fill_rows(prog, rep);
    rep.duals = eng.duals();
    rep.reduced_costs = eng.reduced_costs();
    rep.best_bound = rep.objective;
  } else if (rep.status == SolveStatus::Infeasible) {
    rep.farkas = eng.farkas();
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

SolveReport solve_milp(const MathProgram& prog, const SolverConfig& cfg) {
  const std::vector<int> zcols = binary_columns(prog);
  if (zcols.empty()) return solve_lp(prog, cfg);
  const auto t0 = Clock::now();
  const int nz = static_cast<int>(zcols.size());

  struct Node {
    double bound;
    long long id;
    std::vector<std::int8_t> fix;  // -1 free, else fixed value
    Basis basis;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  long long next_id = 0;
  open.push({-kInf, next_id++, std::vector<std::int8_t>(nz, -1), {}});

  std::vector<double> zlo(nz), zup(nz);
  for (int k = 0; k < nz; ++k) {
    zlo[k] = std::max(0.0, prog.var_lower(zcols[k]));
    zup[k] = std::min(1.0, prog.var_upper(zcols[k]));
  }

  detail::LpEngine eng(prog, cfg);
  Incumbent inc;
  SolveReport rep;
  bool unbounded = false;
  bool failed = false;
  bool timed_out = false;

  auto fixed_open = [&](const std::vector<std::int8_t>& fix) {
    std::vector<int> f0;
    for (int k = 0; k < nz; ++k) {
      if (fix[k] == 0) f0.push_back(k);
    }
    return f0;
  };
  // Whether a subtree with this bound and these fixings could still
  // improve on, or tie-break against, the incumbent.
  auto worth_exploring = [&](double bound,
                             const std::vector<std::int8_t>& fix) {
    if (!inc.found) return true;
    const double tie = tie_tolerance(inc.objective);
    if (bound > inc.objective + tie) return false;
    const double gap = std::max(cfg.mip_gap_abs,
                                cfg.mip_gap * std::abs(inc.objective));
    if (bound < inc.objective - gap) return true;
    return open_set_less(fixed_open(fix), inc.open);
  };

  while (!open.empty()) {
    if (rep.nodes >= cfg.max_nodes) break;
    if (cfg.time_limit_seconds > 0.0 &&
        seconds_since(t0) > cfg.time_limit_seconds) {
      timed_out = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (!worth_exploring(node.bound, node.fix)) continue;
    rep.bound_trace.push_back(node.bound);
    ++rep.nodes;

    for (int k = 0; k < nz; ++k) {
      const double lo = node.fix[k] < 0 ? zlo[k] : node.fix[k];
      const double up = node.fix[k] < 0 ? zup[k] : node.fix[k];
      eng.set_col_bounds(zcols[k], lo, up);
    }
    if (!node.basis.empty()) eng.set_basis(node.basis);
    const SolveStatus st = eng.solve();
    if (st == SolveStatus::Infeasible) continue;
    if (st == SolveStatus::Unbounded) {
      unbounded = true;
      break;
    }
    if (st == SolveStatus::TimeLimit) {
      timed_out = true;
      break;
    }
    if (st != SolveStatus::Optimal) {
      failed = true;
      rep.message = to_string(st) + " in node LP: " + eng.message();
      break;
    }
    const double obj = eng.objective();
    if (!worth_exploring(obj, node.fix)) continue;

    std::vector<double> x = eng.primal();
    int branch = -1;
    double best_frac = cfg.int_tol;
    for (int k = 0; k < nz; ++k) {
      const double v = x[zcols[k]];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > best_frac) {
        best_frac = frac;
        branch = k;
      }
    }
    Basis basis = eng.basis();
    if (branch < 0) {
      std::vector<int> open_set;
      for (int k = 0; k < nz; ++k) {
        x[zcols[k]] = std::round(x[zcols[k]]);
        if (x[zcols[k]] < 0.5) open_set.push_back(k);
      }
      inc.offer(obj, x, open_set);
      // A tie with fewer forced openings may hide below a free open line.
      for (int k : open_set) {
        if (node.fix[k] < 0) {
          branch = k;
          break;
        }
      }
      if (branch < 0) continue;
    }
    for (std::int8_t value : {std::int8_t{1}, std::int8_t{0}}) {
      Node child{obj, next_id++, node.fix, basis};
      child.fix[branch] = value;
      if (worth_exploring(child.bound, child.fix)) open.push(std::move(child));
    }
  }

  rep.iterations = eng.iterations();
  rep.wall_seconds = seconds_since(t0);
  if (unbounded) {
    rep.status = SolveStatus::Unbounded;
    return rep;
  }
  if (failed) {
    rep.status = SolveStatus::NumericalError;
  } else if (timed_out) {
    rep.status = SolveStatus::TimeLimit;
  } else if (!open.empty()) {
    rep.status = SolveStatus::NodeLimit;
  } else {
    rep.status = inc.found ? SolveStatus::Optimal : SolveStatus::Infeasible;
  }
  double bound = inc.found ? inc.objective : kInf;
  while (!open.empty()) {
    if (worth_exploring(open.top().bound, open.top().fix)) {
      bound = std::min(bound, open.top().bound);
    }
    open.pop();
  }
  rep.best_bound = bound;
  if (inc.found) {
    rep.x = std::move(inc.x);
    fill_rows(prog, rep);
  }
  return rep;
}

SolveReport enumerate_milp(const MathProgram& prog, int max_open,
                           const SolverConfig& cfg) {
  const std::vector<int> zcols = binary_columns(prog);
  const int nz = static_cast<int>(zcols.size());
  const int kmax = std::min(std::max(max_open, 0), nz);
  double total = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * (nz - i) / (i + 1);
    total += c;
  }
  if (total > 1e6) {
    throw EnumerationTooLargeError("enumeration over " +
                                   std::to_string(static_cast<long long>(total)) +
                                   " switching patterns exceeds 10^6");
  }
  const auto t0 = Clock::now();
  detail::LpEngine eng(prog, cfg);
  Incumbent inc;
  SolveReport rep;
  std::vector<int> combo;
  for (int k = 0; k <= kmax; ++k) {
    combo.resize(k);
    for (int i = 0; i < k; ++i) combo[i] = i;
    for (;;) {
      std::vector<char> is_open(nz, 0);
      for (int c : combo) is_open[c] = 1;
      for (int i = 0; i < nz; ++i) {
        const double v = is_open[i] ? 0.0 : 1.0;
        eng.set_col_bounds(zcols[i], v, v);
      }
      ++rep.nodes;
      const SolveStatus st = eng.solve();
      if (st == SolveStatus::Optimal) {
        inc.offer(eng.objective(), eng.primal(), combo);
      } else if (st == SolveStatus::Unbounded) {
        rep.status = SolveStatus::Unbounded;
        rep.iterations = eng.iterations();
        rep.wall_seconds = seconds_since(t0);
        return rep;
      } else if (st != SolveStatus::Infeasible) {
        throw NumericalError("enumeration LP failed: " + to_string(st) + " " +
                             eng.message());
      }
      // Next k-combination of {0..nz-1} in lexicographic order.
      int i = k - 1;
      while (i >= 0 && combo[i] == nz - k + i) --i;
      if (i < 0) break;
      ++combo[i];
      for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  rep.iterations = eng.iterations();
  rep.wall_seconds = seconds_since(t0);
  rep.status = inc.found ? SolveStatus::Optimal : SolveStatus::Infeasible;
  if (inc.found) {
    rep.x = std::move(inc.x);
    fill_rows(prog, rep);
    rep.best_bound = rep.objective;
  }
  return rep;
}

}  // namespace ots
