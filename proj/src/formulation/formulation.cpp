#include "ots/formulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ots/errors.hpp"

namespace ots {

namespace {

std::string idx(const char* name, int i) {
  return std::string(name) + "[" + std::to_string(i) + "]";
}

std::string idx(const char* name, int i, int j) {
  return std::string(name) + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
}

// Line endpoints and weights read off the operators.
struct LineView {
  int from = 0;
  int to = 0;
  double k_from = 0.0;  // K_mat(l, from)
  double k_to = 0.0;    // K_mat(l, to)
  double big_m = 0.0;
};

struct Network {
  int n = 0, l = 0, gens = 0, wind = 0;
  std::vector<LineView> lines;
  std::vector<std::vector<int>> gens_at;   // per bus
  std::vector<std::vector<int>> lines_at;  // per bus, signed via A
  std::vector<std::vector<double>> a_at;
  Eigen::MatrixXd F;
  Eigen::VectorXd nominal_injection;  // F * xi_hat

  Network(const Grid& grid, const NetworkOperators& ops)
      : n(grid.num_buses()), l(grid.num_lines()), gens(grid.num_gens()),
        wind(grid.num_wind()), lines(l), gens_at(n), lines_at(n), a_at(n),
        F(ops.F) {
    for (int e = 0; e < ops.A.outerSize(); ++e) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(ops.A, e); it; ++it) {
        lines_at[it.row()].push_back(e);
        a_at[it.row()].push_back(it.value());
        if (it.value() > 0) {
          lines[e].from = static_cast<int>(it.row());
        } else {
          lines[e].to = static_cast<int>(it.row());
        }
      }
    }
    const Eigen::SparseMatrix<double, Eigen::RowMajor> k = ops.K_mat;
    for (int e = 0; e < l; ++e) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(k, e); it;
           ++it) {
        if (it.col() == lines[e].from) lines[e].k_from = it.value();
        if (it.col() == lines[e].to) lines[e].k_to = it.value();
      }
      lines[e].big_m = ops.M_diag[e];
    }
    for (int g = 0; g < gens; ++g) gens_at[grid.gens[g].bus].push_back(g);
    Eigen::VectorXd xi_hat(wind);
    for (int w = 0; w < wind; ++w) xi_hat[w] = grid.wind[w].nominal;
    nominal_injection = F * xi_hat;
  }

  // K_l (x_from, x_to) for a bus-indexed variable family.
  LinearExpr angle_term(int e, int v_from, int v_to) const {
    LinearExpr x;
    x.add(v_from, lines[e].k_from);
    x.add(v_to, lines[e].k_to);
    return x;
  }
};

struct FirstStageBlocks {
  VarBlock g, theta, f, z, gamma;
  bool two_stage = false;
  std::vector<int> z_of_line;  // -1 when the line is not switchable
  int switchable = 0;

  LinearExpr z_expr(int e) const {
    return z_of_line[e] < 0 ? LinearExpr(1.0) : LinearExpr::variable(z.at(z_of_line[e]));
  }
};

FirstStageBlocks add_first_stage(MathProgram& p, const Grid& grid, const Network& net,
                                 int max_open, bool two_stage) {
  if (max_open < 0) throw ValidationError("max_open", "must be >= 0");
  FirstStageBlocks fs;
  fs.two_stage = two_stage;
  fs.g = p.add_block(blocks::kG, net.gens, 0.0, 0.0);
  fs.theta = p.add_block(blocks::kTheta, net.n, 0.0, 0.0);
  fs.f = p.add_block(blocks::kF, net.l, 0.0, 0.0);
  fs.z_of_line.assign(net.l, -1);
  for (int e = 0; e < net.l; ++e) {
    if (grid.lines[e].switchable) fs.z_of_line[e] = fs.switchable++;
  }
  fs.z = p.add_block(blocks::kZ, fs.switchable, 0.0, 1.0, VarKind::Binary);
  if (two_stage) fs.gamma = p.add_block(blocks::kGamma, net.gens, 0.0, 0.0);

  for (int g = 0; g < net.gens; ++g) {
    const auto& gen = grid.gens[g];
    p.set_var_bounds(fs.g.at(g), gen.g_min, gen.g_max);
    if (two_stage && gen.agc) p.set_var_bounds(fs.gamma.at(g), -kInf, kInf);
  }
  for (int i = 0; i < net.n; ++i) {
    if (i == grid.ref) continue;
    p.set_var_bounds(fs.theta.at(i), grid.buses[i].theta_min, grid.buses[i].theta_max);
  }
  for (int e = 0; e < net.l; ++e) {
    p.set_var_bounds(fs.f.at(e), grid.lines[e].f_min, grid.lines[e].f_max);
  }

  for (int e = 0; e < net.l; ++e) {
    const auto& line = grid.lines[e];
    const LineView& v = net.lines[e];
    const LinearExpr flow = LinearExpr::variable(fs.f.at(e));
    const LinearExpr kt = net.angle_term(e, fs.theta.at(v.from), fs.theta.at(v.to));
    if (fs.z_of_line[e] < 0) {
      p.add_row(kt - flow, Sense::Equal, 0.0, idx("flow_eq", e));
      continue;
    }
    const int z = fs.z.at(fs.z_of_line[e]);
    p.add_row(flow - LinearExpr::variable(z, line.f_max), Sense::LessEqual, 0.0,
              idx("flow_up", e));
    p.add_row(flow - LinearExpr::variable(z, line.f_min), Sense::GreaterEqual, 0.0,
              idx("flow_lo", e));
    // K theta - f + M (1 - z) >= 0 and K theta - f - M (1 - z) <= 0.
    p.add_row(kt - flow - LinearExpr::variable(z, v.big_m), Sense::GreaterEqual,
              -v.big_m, idx("bigm_lo", e));
    p.add_row(kt - flow + LinearExpr::variable(z, v.big_m), Sense::LessEqual, v.big_m,
              idx("bigm_up", e));
  }
  for (int i = 0; i < net.n; ++i) {
    LinearExpr row;
    for (std::size_t k = 0; k < net.lines_at[i].size(); ++k) {
      row.add(fs.f.at(net.lines_at[i][k]), net.a_at[i][k]);
    }
    for (int g : net.gens_at[i]) row.add(fs.g.at(g), -1.0);
    p.add_row(row, Sense::Equal, -grid.buses[i].load + net.nominal_injection[i],
              idx("balance", i));
  }
  LinearExpr card;
  for (int s = 0; s < fs.switchable; ++s) card.add(fs.z.at(s), 1.0);
  p.add_row(card, Sense::GreaterEqual, fs.switchable - max_open, "cardinality");
  return fs;
}

void set_objective(MathProgram& p, const Grid& grid, const FirstStageBlocks& fs,
                   double gamma_weight) {
  LinearExpr obj;
  for (int g = 0; g < grid.num_gens(); ++g) {
    obj.add(fs.g.at(g), grid.gens[g].cost);
    if (fs.two_stage) obj.add(fs.gamma.at(g), grid.gens[g].reserve_cost * gamma_weight);
  }
  p.set_objective(obj);
}

void finish_metadata(MathProgram& p, long long rows_first_stage) {
  auto& c = p.metadata().counts;
  c["n_rows"] = p.num_rows();
  c["n_vars_bin"] = p.num_binaries();
  c["n_vars_cont"] = p.num_vars() - p.num_binaries();
  c["rows_first_stage"] = rows_first_stage;
  p.check_invariants();
}

// Two-stage program with recourse blocks at every scenario.
MathProgram build_scenario_program(const Grid& grid, const NetworkOperators& ops,
                                   int max_open,
                                   std::span<const Eigen::VectorXd> scenarios,
                                   double gamma_weight, const std::string& builder) {
  const Network net(grid, ops);
  MathProgram p;
  p.metadata().builder = builder;
  const FirstStageBlocks fs = add_first_stage(p, grid, net, max_open, true);
  const int rows_first = p.num_rows();
  const int count = static_cast<int>(scenarios.size());
  const VarBlock th = p.add_block(blocks::kThetaRec, count, net.n, -kInf, kInf);
  const VarBlock fr = p.add_block(blocks::kFRec, count, net.l, -kInf, kInf);

  for (int s = 0; s < count; ++s) {
    const Eigen::VectorXd& xi = scenarios[s];
    const double sigma = xi.sum();
    p.set_var_bounds(th.at(s, grid.ref), 0.0, 0.0);
    for (int g = 0; g < net.gens; ++g) {
      const auto& gen = grid.gens[g];
      const LinearExpr adj = LinearExpr::variable(fs.gamma.at(g), sigma);
      p.add_ranged_row(adj, gen.r_minus, gen.r_plus, idx("reserve", s, g));
      p.add_ranged_row(LinearExpr::variable(fs.g.at(g)) + adj, gen.g_min, gen.g_max,
                       idx("gen", s, g));
    }
    for (int i = 0; i < net.n; ++i) {
      LinearExpr a = LinearExpr::variable(fs.theta.at(i));
      a.add(th.at(s, i), 1.0);
      p.add_ranged_row(a, grid.buses[i].theta_min, grid.buses[i].theta_max,
                       idx("angle", s, i));
    }
    for (int e = 0; e < net.l; ++e) {
      const auto& line = grid.lines[e];
      const LineView& v = net.lines[e];
      LinearExpr flow = LinearExpr::variable(fs.f.at(e));
      flow.add(fr.at(s, e), 1.0);
      const LinearExpr kt = net.angle_term(e, fs.theta.at(v.from), fs.theta.at(v.to)) +
                            net.angle_term(e, th.at(s, v.from), th.at(s, v.to));
      if (fs.z_of_line[e] < 0) {
        p.add_ranged_row(flow, line.f_min, line.f_max, idx("flow", s, e));
        p.add_row(kt - flow, Sense::Equal, 0.0, idx("flow_eq", s, e));
        continue;
      }
      const int z = fs.z.at(fs.z_of_line[e]);
      p.add_row(flow - LinearExpr::variable(z, line.f_max), Sense::LessEqual, 0.0,
                idx("flow_up", s, e));
      p.add_row(flow - LinearExpr::variable(z, line.f_min), Sense::GreaterEqual, 0.0,
                idx("flow_lo", s, e));
      p.add_row(kt - flow - LinearExpr::variable(z, v.big_m), Sense::GreaterEqual,
                -v.big_m, idx("bigm_lo", s, e));
      p.add_row(kt - flow + LinearExpr::variable(z, v.big_m), Sense::LessEqual,
                v.big_m, idx("bigm_up", s, e));
    }
    const Eigen::VectorXd injection = net.F * xi;
    for (int i = 0; i < net.n; ++i) {
      LinearExpr row;
      for (std::size_t k = 0; k < net.lines_at[i].size(); ++k) {
        const int e = net.lines_at[i][k];
        row.add(fs.f.at(e), net.a_at[i][k]);
        row.add(fr.at(s, e), net.a_at[i][k]);
      }
      for (int g : net.gens_at[i]) {
        row.add(fs.g.at(g), -1.0);
        row.add(fs.gamma.at(g), -sigma);
      }
      p.add_row(row, Sense::Equal,
                -grid.buses[i].load + net.nominal_injection[i] + injection[i],
                idx("balance", s, i));
    }
  }
  set_objective(p, grid, fs, gamma_weight);
  p.metadata().scenarios = count;
  if (count > 0) p.metadata().counts["rows_per_scenario"] = (p.num_rows() - rows_first) / count;
  finish_metadata(p, rows_first);
  return p;
}

struct LdrBlocks {
  FirstStageBlocks fs;
  VarBlock Yt, yt, Yf, yf;
  int k = 0;
};

// The uncertain rows of the LDR model in active coordinates xi', grouped as
// reserve low/high, generator low/high, angle low/high, flow low/high and
// the Big-M pair, plus the equalities (balance and fixed-line flow).
struct LdrRows {
  std::vector<std::vector<UncertainRow>> groups;
  std::vector<UncertainRow> equalities;
};

LdrBlocks add_ldr_blocks(MathProgram& p, const Grid& grid, const Network& net,
                         int max_open, int k) {
  LdrBlocks b;
  b.k = k;
  b.fs = add_first_stage(p, grid, net, max_open, true);
  b.Yt = p.add_block(blocks::kYTheta, net.n, k, -kInf, kInf);
  b.yt = p.add_block(blocks::kYThetaConst, net.n, -kInf, kInf);
  b.Yf = p.add_block(blocks::kYF, net.l, k, -kInf, kInf);
  b.yf = p.add_block(blocks::kYFConst, net.l, -kInf, kInf);
  for (int c = 0; c < k; ++c) p.set_var_bounds(b.Yt.at(grid.ref, c), 0.0, 0.0);
  p.set_var_bounds(b.yt.at(grid.ref), 0.0, 0.0);
  return b;
}

LdrRows ldr_rows(const Grid& grid, const Network& net, const LdrBlocks& b,
                 const UncertaintyPolytope& poly) {
  const int k = b.k;
  const FirstStageBlocks& fs = b.fs;
  // 1'xi = ones' xi' + sigma0 and F xi = FE xi' + F o.
  const Eigen::VectorXd ones = poly.embed().colwise().sum().transpose();
  const double sigma0 = poly.offset().sum();
  const Eigen::MatrixXd fe = net.F * poly.embed();
  const Eigen::VectorXd fo = net.F * poly.offset();

  auto row = [k](LinearExpr c, double rhs, std::string name) {
    UncertainRow r;
    r.constant = std::move(c);
    r.coeff.assign(k, LinearExpr());
    r.rhs = rhs;
    r.name = std::move(name);
    return r;
  };
  auto negate = [](UncertainRow r) {
    r.constant *= -1.0;
    for (auto& c : r.coeff) c *= -1.0;
    return r;
  };

  LdrRows out;
  out.groups.resize(10);
  for (int g = 0; g < net.gens; ++g) {
    const auto& gen = grid.gens[g];
    UncertainRow adj = row(LinearExpr::variable(fs.gamma.at(g), sigma0), 0.0, "");
    for (int c = 0; c < k; ++c) adj.coeff[c] = LinearExpr::variable(fs.gamma.at(g), ones[c]);
    UncertainRow lo = negate(adj);
    lo.rhs = -gen.r_minus;
    lo.name = idx("reserve_lo", g);
    UncertainRow hi = adj;
    hi.rhs = gen.r_plus;
    hi.name = idx("reserve_up", g);
    out.groups[0].push_back(lo);
    out.groups[1].push_back(hi);

    UncertainRow tot = adj;
    tot.constant.add(fs.g.at(g), 1.0);
    UncertainRow glo = negate(tot);
    glo.rhs = -gen.g_min;
    glo.name = idx("gen_lo", g);
    tot.rhs = gen.g_max;
    tot.name = idx("gen_up", g);
    out.groups[2].push_back(glo);
    out.groups[3].push_back(tot);
  }
  for (int i = 0; i < net.n; ++i) {
    UncertainRow a = row(LinearExpr::variable(fs.theta.at(i)) +
                             LinearExpr::variable(b.yt.at(i)),
                         grid.buses[i].theta_max, idx("angle_up", i));
    for (int c = 0; c < k; ++c) a.coeff[c] = LinearExpr::variable(b.Yt.at(i, c));
    UncertainRow lo = negate(a);
    lo.rhs = -grid.buses[i].theta_min;
    lo.name = idx("angle_lo", i);
    out.groups[4].push_back(lo);
    out.groups[5].push_back(a);
  }
  for (int e = 0; e < net.l; ++e) {
    const auto& line = grid.lines[e];
    const LineView& v = net.lines[e];
    UncertainRow flow = row(LinearExpr::variable(fs.f.at(e)) +
                                LinearExpr::variable(b.yf.at(e)),
                            0.0, "");
    for (int c = 0; c < k; ++c) flow.coeff[c] = LinearExpr::variable(b.Yf.at(e, c));
    UncertainRow lo = negate(flow);
    UncertainRow hi = flow;
    lo.name = idx("flow_lo", e);
    hi.name = idx("flow_up", e);
    const int zi = fs.z_of_line[e];
    if (zi < 0) {
      lo.rhs = -line.f_min;
      hi.rhs = line.f_max;
    } else {
      lo.constant.add(fs.z.at(zi), line.f_min);
      hi.constant.add(fs.z.at(zi), -line.f_max);
    }
    out.groups[6].push_back(lo);
    out.groups[7].push_back(hi);

    // Angle-flow coupling: K(theta + theta') - (f + f').
    UncertainRow kf = row(net.angle_term(e, fs.theta.at(v.from), fs.theta.at(v.to)) +
                              net.angle_term(e, b.yt.at(v.from), b.yt.at(v.to)) -
                              flow.constant,
                          0.0, "");
    for (int c = 0; c < k; ++c) {
      kf.coeff[c] = net.angle_term(e, b.Yt.at(v.from, c), b.Yt.at(v.to, c)) -
                    flow.coeff[c];
    }
    if (zi < 0) {
      kf.name = idx("flow_eq", e);
      out.equalities.push_back(kf);
      continue;
    }
    // -(K.. - f..) + M z <= M  and  (K.. - f..) + M z <= M.
    UncertainRow m_lo = negate(kf);
    m_lo.constant.add(fs.z.at(zi), v.big_m);
    m_lo.rhs = v.big_m;
    m_lo.name = idx("bigm_lo", e);
    kf.constant.add(fs.z.at(zi), v.big_m);
    kf.rhs = v.big_m;
    kf.name = idx("bigm_up", e);
    out.groups[8].push_back(m_lo);
    out.groups[9].push_back(kf);
  }
  for (int i = 0; i < net.n; ++i) {
    // A(f + f') - (g + g') = -d + F(xi_hat + xi).
    UncertainRow bal = row(LinearExpr(), -grid.buses[i].load + net.nominal_injection[i] + fo[i],
                           idx("balance_ldr", i));
    for (std::size_t j = 0; j < net.lines_at[i].size(); ++j) {
      const int e = net.lines_at[i][j];
      const double a = net.a_at[i][j];
      bal.constant.add(fs.f.at(e), a);
      bal.constant.add(b.yf.at(e), a);
      for (int c = 0; c < k; ++c) bal.coeff[c].add(b.Yf.at(e, c), a);
    }
    for (int g : net.gens_at[i]) {
      bal.constant.add(fs.g.at(g), -1.0);
      bal.constant.add(fs.gamma.at(g), -sigma0);
      for (int c = 0; c < k; ++c) bal.coeff[c].add(fs.gamma.at(g), -ones[c]);
    }
    for (int c = 0; c < k; ++c) bal.coeff[c].add_constant(-fe(i, c));
    out.equalities.push_back(bal);
  }
  return out;
}

const char* kAlphaNames[10] = {"alpha1", "alpha2", "alpha3", "alpha4", "alpha5",
                               "alpha6", "alpha7", "alpha8", "alpha9", "alpha10"};

// Expectation of the row against 1 and against each t_j - S_j xi'.
void add_moment_rows(MathProgram& p, std::span<const UncertainRow> rows,
                     const UncertaintyPolytope& poly) {
  const int k = poly.dim();
  const Eigen::MatrixXd& S = poly.S();
  const Eigen::VectorXd& t = poly.t();
  const Eigen::VectorXd& mu = poly.mu();
  const Eigen::MatrixXd& m2 = *poly.second_moment();
  const Eigen::VectorXd w = t - S * mu;
  const Eigen::MatrixXd v = t * mu.transpose() - S * m2;  // row j: t_j mu' - S_j M2
  for (const auto& r : rows) {
    LinearExpr mean = r.constant;
    for (int c = 0; c < k; ++c) mean += mu[c] * r.coeff[c];
    p.add_row(mean, Sense::LessEqual, r.rhs, r.name + "_mean");
    for (int j = 0; j < poly.num_rows(); ++j) {
      const double scale = std::max(std::abs(w[j]), v.row(j).cwiseAbs().maxCoeff());
      if (scale == 0.0) continue;
      LinearExpr e = (w[j] / scale) * r.constant;
      for (int c = 0; c < k; ++c) {
        if (v(j, c) != 0.0) e += (v(j, c) / scale) * r.coeff[c];
      }
      p.add_row(e, Sense::LessEqual, r.rhs * w[j] / scale,
                r.name + "_m" + std::to_string(j));
    }
  }
}

void fix_open_lines(MathProgram& p, const Grid& grid, const FirstStageBlocks& fs,
                    const std::vector<int>& open) {
  std::vector<bool> is_open(grid.num_lines(), false);
  for (int e : open) {
    if (e < 0 || e >= grid.num_lines() || fs.z_of_line[e] < 0) {
      throw ValidationError("fixed_open_lines",
                            "line " + std::to_string(e) + " is not switchable");
    }
    is_open[e] = true;
  }
  for (int e = 0; e < grid.num_lines(); ++e) {
    if (fs.z_of_line[e] < 0) continue;
    const double v = is_open[e] ? 0.0 : 1.0;
    p.set_var_bounds(fs.z.at(fs.z_of_line[e]), v, v);
  }
}

}  // namespace

MathProgram build_deterministic(const Grid& grid, const NetworkOperators& ops,
                                int max_open) {
  const Network net(grid, ops);
  MathProgram p;
  p.metadata().builder = "deterministic";
  const FirstStageBlocks fs = add_first_stage(p, grid, net, max_open, false);
  set_objective(p, grid, fs, 0.0);
  finish_metadata(p, p.num_rows());
  return p;
}

MathProgram build_saa(const Grid& grid, const NetworkOperators& ops, int max_open,
                      const UncertaintyPolytope& poly,
                      std::span<const Eigen::VectorXd> scenarios) {
  if (scenarios.empty()) throw ValidationError("scenarios", "at least one required");
  double sigma = 0.0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    if (scenarios[s].size() != grid.num_wind() || !poly.contains(scenarios[s])) {
      throw ScenarioOutsideSupportError("scenario " + std::to_string(s) +
                                        " lies outside the support");
    }
    sigma += scenarios[s].sum();
  }
  return build_scenario_program(grid, ops, max_open, scenarios,
                                sigma / static_cast<double>(scenarios.size()), "saa");
}

VarBlock robustify_le(MathProgram& prog, std::span<const UncertainRow> rows,
                      const UncertaintyPolytope& poly, const std::string& alpha_name) {
  const int m = poly.num_rows();
  const int k = poly.dim();
  const Eigen::MatrixXd& S = poly.S();
  const Eigen::VectorXd& t = poly.t();
  const VarBlock alpha =
      prog.add_block(alpha_name, static_cast<int>(rows.size()), m, 0.0, kInf);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const UncertainRow& row = rows[r];
    if (static_cast<int>(row.coeff.size()) != k) {
      throw std::logic_error("row '" + row.name + "' has wrong uncertainty dimension");
    }
    const int ri = static_cast<int>(r);
    for (int c = 0; c < k; ++c) {
      LinearExpr e;
      for (int j = 0; j < m; ++j) {
        if (S(j, c) != 0.0) e.add(alpha.at(ri, j), S(j, c));
      }
      e -= row.coeff[c];
      prog.add_row(e, Sense::Equal, 0.0, row.name + "_S" + std::to_string(c));
    }
    LinearExpr e = row.constant;
    for (int j = 0; j < m; ++j) {
      if (t[j] != 0.0) e.add(alpha.at(ri, j), t[j]);
    }
    prog.add_row(e, Sense::LessEqual, row.rhs, row.name);
  }
  return alpha;
}

void split_equality(MathProgram& prog, std::span<const UncertainRow> rows,
                    const UncertaintyPolytope& poly) {
  const int k = poly.dim();
  for (const auto& row : rows) {
    if (static_cast<int>(row.coeff.size()) != k) {
      throw std::logic_error("row '" + row.name + "' has wrong uncertainty dimension");
    }
    for (int c = 0; c < k; ++c) {
      prog.add_row(row.coeff[c], Sense::Equal, 0.0, row.name + "_xi" + std::to_string(c));
    }
    prog.add_row(row.constant, Sense::Equal, row.rhs, row.name);
  }
}

MathProgram build_primal_ldr(const Grid& grid, const NetworkOperators& ops,
                             int max_open, const UncertaintyPolytope& poly) {
  if (poly.full_dim() != grid.num_wind()) {
    throw ValidationError("support", "dimension differs from the wind farm count");
  }
  const Network net(grid, ops);
  MathProgram p;
  p.metadata().builder = "primal_ldr";
  const LdrBlocks b = add_ldr_blocks(p, grid, net, max_open, poly.dim());
  const int rows_first = p.num_rows();
  const LdrRows rows = ldr_rows(grid, net, b, poly);
  for (int gidx = 0; gidx < 10; ++gidx) {
    robustify_le(p, rows.groups[gidx], poly, kAlphaNames[gidx]);
  }
  split_equality(p, rows.equalities, poly);
  set_objective(p, grid, b.fs, poly.full_mean().sum());
  finish_metadata(p, rows_first);
  return p;
}

MathProgram build_dual_ldr(const Grid& grid, const NetworkOperators& ops,
                           int max_open, const UncertaintyPolytope& poly,
                           const DualLdrOptions& options) {
  if (!poly.second_moment()) {
    throw MissingMomentsError("dual LDR needs the second moment of xi");
  }
  if (poly.full_dim() != grid.num_wind()) {
    throw ValidationError("support", "dimension differs from the wind farm count");
  }
  const Network net(grid, ops);
  MathProgram p;
  p.metadata().builder = "dual_ldr";
  p.metadata().notes.push_back(
      "recourse rows are enforced against affine multipliers that do not depend on z");
  const LdrBlocks b = add_ldr_blocks(p, grid, net, max_open, poly.dim());
  const int rows_first = p.num_rows();
  const LdrRows rows = ldr_rows(grid, net, b, poly);
  // Reserve and generator rows involve no recourse and stay exact.
  for (int gidx = 0; gidx < 4; ++gidx) {
    robustify_le(p, rows.groups[gidx], poly, kAlphaNames[gidx]);
  }
  for (int gidx = 4; gidx < 10; ++gidx) add_moment_rows(p, rows.groups[gidx], poly);
  split_equality(p, rows.equalities, poly);
  if (options.fixed_open_lines) {
    fix_open_lines(p, grid, b.fs, *options.fixed_open_lines);
    p.metadata().notes.push_back("switching decision fixed");
  }
  set_objective(p, grid, b.fs, poly.full_mean().sum());
  finish_metadata(p, rows_first);
  return p;
}

MathProgram build_vertex_oracle(const Grid& grid, const NetworkOperators& ops,
                                int max_open, const UncertaintyPolytope& poly) {
  if (poly.full_dim() != grid.num_wind()) {
    throw ValidationError("support", "dimension differs from the wind farm count");
  }
  const auto corners = vertices(poly);
  return build_scenario_program(grid, ops, max_open, corners, poly.full_mean().sum(),
                                "vertex_oracle");
}


FirstStage extract_first_stage(const Grid& grid, const MathProgram& prog,
                               const SolveReport& report) {
  FirstStage fs;
  fs.g = report.block_values(prog, blocks::kG);
  fs.theta = report.block_values(prog, blocks::kTheta);
  fs.f = report.block_values(prog, blocks::kF);
  if (prog.find_block(blocks::kGamma) != nullptr) {
    fs.gamma = report.block_values(prog, blocks::kGamma);
  } else {
    fs.gamma.assign(grid.num_gens(), 0.0);
  }
  const auto z = report.block_values(prog, blocks::kZ);
  fs.closed.assign(grid.num_lines(), true);
  int s = 0;
  for (int e = 0; e < grid.num_lines(); ++e) {
    if (!grid.lines[e].switchable) continue;
    if (z[s++] < 0.5) {
      fs.closed[e] = false;
      fs.open_lines.push_back(e);
    }
  }
  return fs;
}

AffinePolicy extract_policy(const MathProgram& prog, const SolveReport& report,
                            const UncertaintyPolytope& poly) {
  const VarBlock& yt = prog.block(blocks::kYTheta);
  const VarBlock& yf = prog.block(blocks::kYF);
  const int k = yt.cols;
  if (k != poly.dim()) throw std::logic_error("policy dimension differs from support");
  auto matrix = [&](const VarBlock& b) {
    Eigen::MatrixXd m(b.rows, k);
    for (int r = 0; r < b.rows; ++r) {
      for (int c = 0; c < k; ++c) m(r, c) = report.x[b.at(r, c)];
    }
    return m;
  };
  auto vector = [&](const char* name) {
    const auto v = report.block_values(prog, name);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  };
  // theta' = Y xi' + y with xi' = E'(xi - o).
  AffinePolicy pol;
  pol.Y_theta = matrix(yt) * poly.embed().transpose();
  pol.Y_f = matrix(yf) * poly.embed().transpose();
  pol.y_theta = vector(blocks::kYThetaConst) - pol.Y_theta * poly.offset();
  pol.y_f = vector(blocks::kYFConst) - pol.Y_f * poly.offset();
  pol.gamma = vector(blocks::kGamma);
  return pol;
}

double recourse_violation(const Grid& grid, const NetworkOperators& ops,
                          const FirstStage& fs, const Eigen::VectorXd& xi,
                          const Eigen::VectorXd& theta_rec,
                          const Eigen::VectorXd& f_rec) {
  const double sigma = xi.sum();
  double worst = 0.0;
  auto range = [&worst](double v, double lo, double hi) {
    worst = std::max({worst, lo - v, v - hi});
  };
  for (int g = 0; g < grid.num_gens(); ++g) {
    const auto& gen = grid.gens[g];
    const double adj = fs.gamma[g] * sigma;
    range(adj, gen.r_minus, gen.r_plus);
    range(fs.g[g] + adj, gen.g_min, gen.g_max);
  }
  Eigen::VectorXd theta(grid.num_buses());
  for (int i = 0; i < grid.num_buses(); ++i) {
    theta[i] = fs.theta[i] + theta_rec[i];
    range(theta[i], grid.buses[i].theta_min, grid.buses[i].theta_max);
  }
  Eigen::VectorXd flow(grid.num_lines());
  for (int e = 0; e < grid.num_lines(); ++e) flow[e] = fs.f[e] + f_rec[e];
  const Eigen::VectorXd kt = ops.K_mat * theta;
  for (int e = 0; e < grid.num_lines(); ++e) {
    const auto& line = grid.lines[e];
    const double z = fs.closed[e] ? 1.0 : 0.0;
    range(flow[e], line.f_min * z, line.f_max * z);
    const double gap = kt[e] - flow[e];
    if (!line.switchable) {
      worst = std::max(worst, std::abs(gap));
    } else {
      const double slack = ops.M_diag[e] * (1.0 - z);
      range(gap, -slack, slack);
    }
  }
  Eigen::VectorXd net = ops.A * flow;
  for (int g = 0; g < grid.num_gens(); ++g) {
    net[grid.gens[g].bus] -= fs.g[g] + fs.gamma[g] * sigma;
  }
  Eigen::VectorXd wind(grid.num_wind());
  for (int w = 0; w < grid.num_wind(); ++w) wind[w] = grid.wind[w].nominal + xi[w];
  const Eigen::VectorXd injection = ops.F * wind;
  for (int i = 0; i < grid.num_buses(); ++i) {
    worst = std::max(worst, std::abs(net[i] + grid.buses[i].load - injection[i]));
  }
  return worst;
}

double policy_violation(const Grid& grid, const NetworkOperators& ops,
                        const FirstStage& fs, const AffinePolicy& policy,
                        const Eigen::VectorXd& xi) {
  const Eigen::VectorXd th = policy.Y_theta * xi + policy.y_theta;
  const Eigen::VectorXd fr = policy.Y_f * xi + policy.y_f;
  return recourse_violation(grid, ops, fs, xi, th, fr);
}

double realized_cost(const Grid& grid, const FirstStage& fs, const Eigen::VectorXd& xi) {
  const double sigma = xi.sum();
  double cost = 0.0;
  for (int g = 0; g < grid.num_gens(); ++g) {
    cost += grid.gens[g].cost * fs.g[g] + grid.gens[g].reserve_cost * fs.gamma[g] * sigma;
  }
  return cost;
}

MathProgram build_second_stage(const Grid& grid, const NetworkOperators& ops,
                               const FirstStage& fs, const Eigen::VectorXd& xi) {
  const Network net(grid, ops);
  const double sigma = xi.sum();
  MathProgram p;
  p.metadata().builder = "second_stage";
  const VarBlock th = p.add_block(blocks::kThetaRec, net.n, 0.0, 0.0);
  const VarBlock fr = p.add_block(blocks::kFRec, net.l, 0.0, 0.0);
  const VarBlock up = p.add_block("slack_up", net.n, 0.0, kInf);
  const VarBlock dn = p.add_block("slack_dn", net.n, 0.0, kInf);
  auto set_bounds = [&p](int var, double lo, double hi) {
    if (lo > hi) lo = hi = 0.5 * (lo + hi);
    p.set_var_bounds(var, lo, hi);
  };
  for (int i = 0; i < net.n; ++i) {
    if (i == grid.ref) continue;
    set_bounds(th.at(i), grid.buses[i].theta_min - fs.theta[i],
               grid.buses[i].theta_max - fs.theta[i]);
  }
  for (int e = 0; e < net.l; ++e) {
    const auto& line = grid.lines[e];
    const LineView& v = net.lines[e];
    const double kt = v.k_from * fs.theta[v.from] + v.k_to * fs.theta[v.to];
    const LinearExpr ktr = net.angle_term(e, th.at(v.from), th.at(v.to));
    if (fs.closed[e]) {
      set_bounds(fr.at(e), line.f_min - fs.f[e], line.f_max - fs.f[e]);
      p.add_row(ktr - LinearExpr::variable(fr.at(e)), Sense::Equal, fs.f[e] - kt,
                idx("flow_eq", e));
    } else {
      set_bounds(fr.at(e), -fs.f[e], -fs.f[e]);
      p.add_ranged_row(ktr, -v.big_m - kt, v.big_m - kt, idx("bigm", e));
    }
  }
  const Eigen::VectorXd injection = net.F * xi;
  for (int i = 0; i < net.n; ++i) {
    LinearExpr row;
    double rhs = -grid.buses[i].load + net.nominal_injection[i] + injection[i];
    for (std::size_t k = 0; k < net.lines_at[i].size(); ++k) {
      const int e = net.lines_at[i][k];
      row.add(fr.at(e), net.a_at[i][k]);
      rhs -= net.a_at[i][k] * fs.f[e];
    }
    for (int g : net.gens_at[i]) rhs += fs.g[g] + fs.gamma[g] * sigma;
    row.add(up.at(i), 1.0);
    row.add(dn.at(i), -1.0);
    p.add_row(row, Sense::Equal, rhs, idx("balance", i));
  }
  LinearExpr obj;
  for (int i = 0; i < net.n; ++i) {
    obj.add(up.at(i), 1.0);
    obj.add(dn.at(i), 1.0);
  }
  p.set_objective(obj);
  p.check_invariants();
  return p;
}

RecourseCheck check_recourse(const Grid& grid, const NetworkOperators& ops,
                             const FirstStage& fs, const Eigen::VectorXd& xi,
                             const SolverConfig& cfg, Basis* basis) {
  constexpr double kTol = 1e-7;
  const double sigma = xi.sum();
  double fixed = 0.0;
  for (int g = 0; g < grid.num_gens(); ++g) {
    const auto& gen = grid.gens[g];
    const double adj = fs.gamma[g] * sigma;
    fixed = std::max({fixed, gen.r_minus - adj, adj - gen.r_plus,
                      gen.g_min - fs.g[g] - adj, fs.g[g] + adj - gen.g_max});
  }
  const MathProgram lp = build_second_stage(grid, ops, fs, xi);
  const bool warm = basis != nullptr && !basis->empty();
  SolveReport r = solve_lp(lp, cfg, warm ? basis : nullptr);
  if (r.status != SolveStatus::Optimal) {
    throw NumericalError("second-stage LP: " + to_string(r.status));
  }
  if (basis != nullptr) *basis = std::move(r.basis);
  RecourseCheck out;
  out.shortfall = std::max(r.objective, 0.0) + fixed;
  out.feasible = out.shortfall <= kTol;
  out.iterations = r.iterations;
  return out;
}

namespace {

ScenarioSolve generate(const Grid& grid, const NetworkOperators& ops, int max_open,
                       std::span<const Eigen::VectorXd> scenarios, double sigma_weight,
                       const std::string& tag, const SolverConfig& cfg) {
  constexpr int kAddPerRound = 10;
  const auto start = std::chrono::steady_clock::now();
  ScenarioSolve out;
  const int count = static_cast<int>(scenarios.size());
  // Start from the extremes of total wind.
  int lo = 0, hi = 0;
  for (int s = 0; s < count; ++s) {
    if (scenarios[s].sum() < scenarios[lo].sum()) lo = s;
    if (scenarios[s].sum() > scenarios[hi].sum()) hi = s;
  }
  std::vector<char> in(count, 0);
  out.active = {lo};
  in[lo] = 1;
  if (!in[hi]) {
    out.active.push_back(hi);
    in[hi] = 1;
  }
  long long iterations = 0, nodes = 0;
  for (;;) {
    ++out.rounds;
    std::vector<Eigen::VectorXd> subset;
    for (int s : out.active) subset.push_back(scenarios[s]);
    out.program = build_scenario_program(grid, ops, max_open, subset, sigma_weight, tag);
    out.report = solve_milp(out.program, cfg);
    iterations += out.report.iterations;
    nodes += out.report.nodes;
    if (out.report.status != SolveStatus::Optimal) break;
    const FirstStage fs = extract_first_stage(grid, out.program, out.report);
    std::vector<std::pair<double, int>> violated;
    Basis basis;
    for (int s = 0; s < count; ++s) {
      if (in[s]) continue;
      const RecourseCheck c = check_recourse(grid, ops, fs, scenarios[s], cfg, &basis);
      iterations += c.iterations;
      if (!c.feasible) violated.emplace_back(-c.shortfall, s);
    }
    if (violated.empty()) break;
    std::sort(violated.begin(), violated.end());
    const int take = std::min<int>(kAddPerRound, static_cast<int>(violated.size()));
    for (int k = 0; k < take; ++k) {
      out.active.push_back(violated[k].second);
      in[violated[k].second] = 1;
    }
  }
  std::sort(out.active.begin(), out.active.end());
  out.report.iterations = iterations;
  out.report.nodes = nodes;
  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

ScenarioSolve solve_saa(const Grid& grid, const NetworkOperators& ops, int max_open,
                        const UncertaintyPolytope& poly,
                        std::span<const Eigen::VectorXd> scenarios,
                        const SolverConfig& cfg) {
  const ProgramMetadata full =
      build_saa(grid, ops, max_open, poly, scenarios).metadata();
  double mean_sigma = 0.0;
  for (const auto& xi : scenarios) mean_sigma += xi.sum();
  mean_sigma /= static_cast<double>(scenarios.size());
  ScenarioSolve out = generate(grid, ops, max_open, scenarios, mean_sigma, "saa", cfg);
  out.full = full;
  return out;
}

ScenarioSolve exact_vertex_oracle(const Grid& grid, const NetworkOperators& ops,
                                  int max_open, const UncertaintyPolytope& poly,
                                  const SolverConfig& cfg) {
  if (poly.full_dim() != grid.num_wind()) {
    throw ValidationError("support", "dimension differs from the wind farm count");
  }
  const auto corners = vertices(poly);
  ScenarioSolve out = generate(grid, ops, max_open, corners, poly.full_mean().sum(),
                               "vertex_oracle", cfg);
  out.full = build_vertex_oracle(grid, ops, max_open, poly).metadata();
  return out;
}

}  // namespace ots
