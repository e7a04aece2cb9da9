#include "solver/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ots::detail {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kHarrisTol = 1e-7;
constexpr double kPivotTol = 1e-7;
constexpr double kSmallPivot = 1e-6;
constexpr double kMaxWeight = 1e12;
constexpr int kMaxNumericalRetries = 8;

double pow2_round(double v) { return std::exp2(std::round(std::log2(v))); }

}  // namespace

LpEngine::LpEngine(const MathProgram& prog, const SolverConfig& cfg)
    : cfg_(cfg), n_(prog.num_vars()), m_(prog.num_rows()) {
  scale(prog);
  const int nt = n_ + m_;
  x_.assign(nt, 0.0);
  d_.assign(nt, 0.0);
  status_.assign(nt, Status::Lower);
  pos_.assign(nt, -1);
  head_.assign(m_, -1);
  dse_.assign(m_, 1.0);
  logical_row_.resize(m_);
  std::iota(logical_row_.begin(), logical_row_.end(), 0);
  minus_one_.assign(m_, -1.0);
  alpha_.assign(nt, 0.0);
  row_mark_.assign(nt, 0);
  work_cost_ = cost_;
  slack_basis();
}

void LpEngine::scale(const MathProgram& prog) {
  const int n = n_;
  const int m = m_;
  // Row-wise copy.
  r_start_.assign(m + 1, 0);
  for (int i = 0; i < m; ++i) {
    r_start_[i + 1] = r_start_[i] + static_cast<int>(prog.row_indices(i).size());
  }
  r_col_.resize(r_start_[m]);
  r_val_.resize(r_start_[m]);
  for (int i = 0; i < m; ++i) {
    auto idx = prog.row_indices(i);
    auto val = prog.row_values(i);
    std::copy(idx.begin(), idx.end(), r_col_.begin() + r_start_[i]);
    std::copy(val.begin(), val.end(), r_val_.begin() + r_start_[i]);
  }

  rscale_.assign(m, 1.0);
  std::vector<double> cs(n, 1.0);
  if (cfg_.scaling && m > 0) {
    std::vector<double> cmax(n), cmin(n);
    for (int pass = 0; pass < 6; ++pass) {
      for (int i = 0; i < m; ++i) {
        double mx = 0.0;
        double mn = kInf;
        for (int e = r_start_[i]; e < r_start_[i + 1]; ++e) {
          const double a = std::abs(r_val_[e]) * cs[r_col_[e]];
          if (a == 0.0) continue;
          mx = std::max(mx, a);
          mn = std::min(mn, a);
        }
        rscale_[i] = mx > 0.0 ? 1.0 / std::sqrt(mx * mn) : 1.0;
      }
      std::fill(cmax.begin(), cmax.end(), 0.0);
      std::fill(cmin.begin(), cmin.end(), kInf);
      for (int i = 0; i < m; ++i) {
        for (int e = r_start_[i]; e < r_start_[i + 1]; ++e) {
          const double a = std::abs(r_val_[e]) * rscale_[i];
          if (a == 0.0) continue;
          const int j = r_col_[e];
          cmax[j] = std::max(cmax[j], a);
          cmin[j] = std::min(cmin[j], a);
        }
      }
      for (int j = 0; j < n; ++j) {
        cs[j] = cmax[j] > 0.0 ? 1.0 / std::sqrt(cmax[j] * cmin[j]) : 1.0;
      }
    }
    for (auto& r : rscale_) r = pow2_round(r);
    for (auto& c : cs) c = pow2_round(c);
  }
  for (int i = 0; i < m; ++i) {
    for (int e = r_start_[i]; e < r_start_[i + 1]; ++e) {
      r_val_[e] *= rscale_[i] * cs[r_col_[e]];
    }
  }

  // Column-wise copy of the scaled matrix.
  a_start_.assign(n + 1, 0);
  for (int c : r_col_) ++a_start_[c + 1];
  for (int j = 0; j < n; ++j) a_start_[j + 1] += a_start_[j];
  a_row_.resize(r_col_.size());
  a_val_.resize(r_col_.size());
  {
    std::vector<int> fill(a_start_.begin(), a_start_.end() - 1);
    for (int i = 0; i < m; ++i) {
      for (int e = r_start_[i]; e < r_start_[i + 1]; ++e) {
        const int slot = fill[r_col_[e]]++;
        a_row_[slot] = i;
        a_val_[slot] = r_val_[e];
      }
    }
  }

  cscale_.assign(n + m, 1.0);
  for (int j = 0; j < n; ++j) cscale_[j] = cs[j];
  for (int i = 0; i < m; ++i) cscale_[n + i] = 1.0 / rscale_[i];

  cost_.assign(n + m, 0.0);
  double cmax = 0.0;
  for (int j = 0; j < n; ++j) {
    cost_[j] = prog.costs()[j] * cs[j];
    cmax = std::max(cmax, std::abs(cost_[j]));
  }
  objscale_ = cmax > 0.0 ? pow2_round(1.0 / cmax) : 1.0;
  for (int j = 0; j < n; ++j) cost_[j] *= objscale_;
  obj_constant_ = prog.objective_constant();

  lo_.assign(n + m, 0.0);
  up_.assign(n + m, 0.0);
  for (int j = 0; j < n; ++j) {
    lo_[j] = prog.var_lower(j) / cs[j];
    up_[j] = prog.var_upper(j) / cs[j];
  }
  for (int i = 0; i < m; ++i) {
    lo_[n + i] = prog.row_lower(i) * rscale_[i];
    up_[n + i] = prog.row_upper(i) * rscale_[i];
  }
}

LuFactor::SparseColumn LpEngine::column(int j) const {
  if (j < n_) {
    const auto b = static_cast<std::size_t>(a_start_[j]);
    const auto len = static_cast<std::size_t>(a_start_[j + 1] - a_start_[j]);
    return {std::span<const int>(a_row_.data() + b, len),
            std::span<const double>(a_val_.data() + b, len)};
  }
  const int i = j - n_;
  return {std::span<const int>(logical_row_.data() + i, 1),
          std::span<const double>(minus_one_.data() + i, 1)};
}

void LpEngine::place_nonbasic(int j) {
  const bool has_lo = std::isfinite(lo_[j]);
  const bool has_up = std::isfinite(up_[j]);
  if (has_lo && has_up) {
    const bool upper = lo_[j] != up_[j] && work_cost_[j] < 0.0;
    status_[j] = upper ? Status::Upper : Status::Lower;
    x_[j] = upper ? up_[j] : lo_[j];
  } else if (has_lo) {
    status_[j] = Status::Lower;
    x_[j] = lo_[j];
  } else if (has_up) {
    status_[j] = Status::Upper;
    x_[j] = up_[j];
  } else {
    status_[j] = Status::Free;
    x_[j] = 0.0;
  }
  pos_[j] = -1;
}

void LpEngine::slack_basis() {
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = i;
    status_[n_ + i] = Status::Basic;
  }
  std::fill(dse_.begin(), dse_.end(), 1.0);
  factored_ = false;
}

void LpEngine::set_col_bounds(int j, double lower, double upper) {
  lo_[j] = lower / cscale_[j];
  up_[j] = upper / cscale_[j];
  switch (status_[j]) {
    case Status::Basic:
      return;
    case Status::Lower:
      if (std::isfinite(lo_[j])) {
        x_[j] = lo_[j];
        return;
      }
      break;
    case Status::Upper:
      if (std::isfinite(up_[j])) {
        x_[j] = up_[j];
        return;
      }
      break;
    case Status::Free:
      if (!std::isfinite(lo_[j]) && !std::isfinite(up_[j])) return;
      break;
  }
  place_nonbasic(j);
}

Basis LpEngine::basis() const {
  Basis b;
  auto convert = [](Status s) {
    switch (s) {
      case Status::Basic:
        return BasisStatus::Basic;
      case Status::Lower:
        return BasisStatus::AtLower;
      case Status::Upper:
        return BasisStatus::AtUpper;
      case Status::Free:
        break;
    }
    return BasisStatus::Free;
  };
  b.cols.resize(n_);
  b.rows.resize(m_);
  for (int j = 0; j < n_; ++j) b.cols[j] = convert(status_[j]);
  for (int i = 0; i < m_; ++i) b.rows[i] = convert(status_[n_ + i]);
  if (cfg_.dual_steepest_edge) {
    b.weights.assign(n_ + m_, 1.0);
    for (int p = 0; p < m_; ++p) b.weights[head_[p]] = dse_[p];
  }
  return b;
}

void LpEngine::set_basis(const Basis& b) {
  if (static_cast<int>(b.cols.size()) != n_ ||
      static_cast<int>(b.rows.size()) != m_) {
    slack_basis();
    return;
  }
  int basic = 0;
  for (auto s : b.cols) basic += s == BasisStatus::Basic;
  for (auto s : b.rows) basic += s == BasisStatus::Basic;
  if (basic != m_) {
    slack_basis();
    return;
  }
  int p = 0;
  for (int j = 0; j < n_ + m_; ++j) {
    const BasisStatus s = j < n_ ? b.cols[j] : b.rows[j - n_];
    switch (s) {
      case BasisStatus::Basic:
        status_[j] = Status::Basic;
        head_[p] = j;
        pos_[j] = p++;
        break;
      case BasisStatus::AtLower:
        if (std::isfinite(lo_[j])) {
          status_[j] = Status::Lower;
          x_[j] = lo_[j];
          pos_[j] = -1;
        } else {
          place_nonbasic(j);
        }
        break;
      case BasisStatus::AtUpper:
        if (std::isfinite(up_[j])) {
          status_[j] = Status::Upper;
          x_[j] = up_[j];
          pos_[j] = -1;
        } else {
          place_nonbasic(j);
        }
        break;
      case BasisStatus::Free:
        place_nonbasic(j);
        break;
    }
  }
  const bool warm = b.weights.size() == static_cast<std::size_t>(n_ + m_);
  for (int q = 0; q < m_; ++q) dse_[q] = warm ? b.weights[head_[q]] : 1.0;
  factored_ = false;
}

bool LpEngine::needs_refactor() const {
  return lu_.num_updates() >= cfg_.refactor_interval ||
         lu_.eta_nonzeros() > 2 * (lu_.factor_nonzeros() + m_);
}

bool LpEngine::refactor() {
  for (int attempt = 0; attempt < 4; ++attempt) {
    auto res = lu_.factorize(m_, [&](int p) { return column(head_[p]); });
    if (res.singular_positions.empty()) {
      factored_ = true;
      return true;
    }
    for (std::size_t k = 0; k < res.singular_positions.size(); ++k) {
      const int p = res.singular_positions[k];
      const int old = head_[p];
      const int logical = n_ + res.free_rows[k];
      place_nonbasic(old);
      head_[p] = logical;
      pos_[logical] = p;
      status_[logical] = Status::Basic;
      dse_[p] = 1.0;
    }
  }
  factored_ = false;
  message_ = "basis factorization failed repeatedly";
  return false;
}

void LpEngine::compute_primal() {
  std::vector<double>& rhs = col_;
  rhs.assign(m_, 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == Status::Basic || x_[j] == 0.0) continue;
    if (j < n_) {
      for (int e = a_start_[j]; e < a_start_[j + 1]; ++e) {
        rhs[a_row_[e]] -= a_val_[e] * x_[j];
      }
    } else {
      rhs[j - n_] += x_[j];
    }
  }
  lu_.ftran(rhs);
  for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
}

void LpEngine::compute_duals(const std::vector<double>& cost) {
  y_.assign(m_, 0.0);
  for (int p = 0; p < m_; ++p) y_[p] = cost[head_[p]];
  lu_.btran(y_);
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == Status::Basic) {
      d_[j] = 0.0;
      continue;
    }
    double v = cost[j];
    for (int e = a_start_[j]; e < a_start_[j + 1]; ++e) {
      v -= y_[a_row_[e]] * a_val_[e];
    }
    d_[j] = v;
  }
  for (int i = 0; i < m_; ++i) {
    const int j = n_ + i;
    d_[j] = status_[j] == Status::Basic ? 0.0 : cost[j] + y_[i];
  }
}

void LpEngine::dot_row(const std::vector<double>& rho,
                       std::vector<double>& alpha, std::vector<int>& index) {
  for (int j : index) {
    alpha[j] = 0.0;
    row_mark_[j] = 0;
  }
  index.clear();
  for (int i = 0; i < m_; ++i) {
    const double v = rho[i];
    if (v == 0.0) continue;
    for (int e = r_start_[i]; e < r_start_[i + 1]; ++e) {
      const int j = r_col_[e];
      if (status_[j] == Status::Basic) continue;
      if (!row_mark_[j]) {
        row_mark_[j] = 1;
        index.push_back(j);
      }
      alpha[j] += v * r_val_[e];
    }
    const int logical = n_ + i;
    if (status_[logical] != Status::Basic) {
      alpha[logical] = -v;
      row_mark_[logical] = 1;
      index.push_back(logical);
    }
  }
}

double LpEngine::max_primal_infeasibility() const {
  double worst = 0.0;
  for (int p = 0; p < m_; ++p) {
    const int j = head_[p];
    worst = std::max({worst, lo_[j] - x_[j], x_[j] - up_[j]});
  }
  return worst;
}

void LpEngine::perturb_and_shift() {
  work_cost_ = cost_;
  if (cfg_.cost_perturbation) {
    std::mt19937_64 gen(0x5eed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int j = 0; j < n_; ++j) {
      const double u = unit(gen);
      if (lo_[j] == up_[j]) continue;
      const bool has_lo = std::isfinite(lo_[j]);
      const bool has_up = std::isfinite(up_[j]);
      double dir = 0.0;
      if (status_[j] == Status::Lower) {
        dir = 1.0;
      } else if (status_[j] == Status::Upper) {
        dir = -1.0;
      } else if (status_[j] == Status::Basic) {
        if (has_lo && !has_up) dir = 1.0;
        if (has_up && !has_lo) dir = -1.0;
        if (has_lo && has_up) dir = cost_[j] >= 0.0 ? 1.0 : -1.0;
      }
      work_cost_[j] += dir * 5e-7 * (1.0 + std::abs(cost_[j])) * (1.0 + u);
    }
  }
  compute_duals(work_cost_);
  correct_dual_infeasibilities();
}

void LpEngine::correct_dual_infeasibilities() {
  bool flipped = false;
  for (int j = 0; j < n_ + m_; ++j) {
    const double dj = d_[j];
    switch (status_[j]) {
      case Status::Basic:
        break;
      case Status::Lower:
        if (dj < -kDualTol && lo_[j] != up_[j]) {
          if (std::isfinite(up_[j])) {
            status_[j] = Status::Upper;
            x_[j] = up_[j];
            flipped = true;
          } else {
            work_cost_[j] -= dj;
            d_[j] = 0.0;
          }
        }
        break;
      case Status::Upper:
        if (dj > kDualTol && lo_[j] != up_[j]) {
          if (std::isfinite(lo_[j])) {
            status_[j] = Status::Lower;
            x_[j] = lo_[j];
            flipped = true;
          } else {
            work_cost_[j] -= dj;
            d_[j] = 0.0;
          }
        }
        break;
      case Status::Free:
        if (std::abs(dj) > kDualTol) {
          work_cost_[j] -= dj;
          d_[j] = 0.0;
        }
        break;
    }
  }
  if (flipped) compute_primal();
}

bool LpEngine::out_of_budget() {
  if (iterations_ >= cfg_.max_iterations) return true;
  if (cfg_.time_limit_seconds > 0.0 && (iterations_ & 255) == 0) {
    const std::chrono::duration<double> el =
        std::chrono::steady_clock::now() - start_;
    if (el.count() > cfg_.time_limit_seconds) return true;
  }
  return false;
}

void LpEngine::pivot(int r, int q, const std::vector<double>& col) {
  const int leaving = head_[r];
  head_[r] = q;
  pos_[q] = r;
  status_[q] = Status::Basic;
  pos_[leaving] = -1;
  lu_.update(r, col);
}

LpEngine::Outcome LpEngine::dual_simplex() {
  int retries = 0;
  bool allow_small = false;
  std::vector<std::uint8_t> rejected(m_, 0);
  bool any_rejected = false;
  auto refresh = [&] {
    if (!refactor()) return false;
    compute_primal();
    compute_duals(work_cost_);
    correct_dual_infeasibilities();
    if (any_rejected) {
      std::fill(rejected.begin(), rejected.end(), 0);
      any_rejected = false;
    }
    return true;
  };
  for (;;) {
    if (out_of_budget()) return Outcome::IterLimit;
    if (needs_refactor() && !refresh()) {
      return Outcome::Numerical;
    }

    int r = -1;
    double best = 0.0;
    for (int p = 0; p < m_; ++p) {
      if (rejected[p]) continue;
      const int j = head_[p];
      double infeas;
      if (x_[j] < lo_[j] - kPrimalTol) {
        infeas = lo_[j] - x_[j];
      } else if (x_[j] > up_[j] + kPrimalTol) {
        infeas = x_[j] - up_[j];
      } else {
        continue;
      }
      const double score = infeas * infeas / dse_[p];
      if (score > best) {
        best = score;
        r = p;
      }
    }
    if (r < 0) {
      if (!any_rejected) return Outcome::Optimal;
      // Every infeasible row was passed over for small pivots.
      if (lu_.num_updates() > 0) {
        if (!refresh()) return Outcome::Numerical;
      } else {
        std::fill(rejected.begin(), rejected.end(), 0);
        any_rejected = false;
        allow_small = true;
      }
      continue;
    }

    const int jr = head_[r];
    const bool to_lower = x_[jr] < lo_[jr];
    const double s = to_lower ? -1.0 : 1.0;
    const double target = to_lower ? lo_[jr] : up_[jr];

    rho_.assign(m_, 0.0);
    rho_[r] = 1.0;
    lu_.btran(rho_);
    dot_row(rho_, alpha_, alpha_index_);

    cand_.clear();
    for (int j : alpha_index_) {
      const double a = s * alpha_[j];
      double ratio;
      switch (status_[j]) {
        case Status::Lower:
          if (lo_[j] == up_[j] || a <= kPivotTol) continue;
          ratio = std::max(d_[j], 0.0) / a;
          break;
        case Status::Upper:
          if (a >= -kPivotTol) continue;
          ratio = std::min(d_[j], 0.0) / a;
          break;
        case Status::Free:
          if (std::abs(a) <= kPivotTol) continue;
          ratio = 0.0;
          break;
        default:
          continue;
      }
      cand_.emplace_back(ratio, j);
    }
    std::sort(cand_.begin(), cand_.end());

    // Pass over boxed breakpoints while the leaving row stays infeasible
    // on the same side, then a Harris choice among the rest.
    double slope = std::abs(x_[jr] - target);
    std::size_t first = 0;
    while (first < cand_.size()) {
      const int j = cand_[first].second;
      if (status_[j] == Status::Free || !std::isfinite(lo_[j]) ||
          !std::isfinite(up_[j])) {
        break;
      }
      const double drop = std::abs(alpha_[j]) * (up_[j] - lo_[j]);
      if (slope - drop <= kPrimalTol) break;
      slope -= drop;
      ++first;
    }
    if (first == cand_.size()) {
      if (lu_.num_updates() > 0) {
        if (!refresh()) return Outcome::Numerical;
        continue;
      }
      if (first == 0) {
        farkas_ = rho_;
        return Outcome::Infeasible;
      }
      // Flipping every candidate leaves the row infeasible as well.
      farkas_ = rho_;
      return Outcome::Infeasible;
    }
    double tmax = kInf;
    for (std::size_t k = first; k < cand_.size(); ++k) {
      const int j = cand_[k].second;
      const double a = std::abs(alpha_[j]);
      const double bound =
          status_[j] == Status::Free ? kHarrisTol / a : cand_[k].first + kHarrisTol / a;
      tmax = std::min(tmax, bound);
      if (cand_[k].first > tmax) break;
    }
    int q = -1;
    double best_abs = 0.0;
    for (std::size_t k = first; k < cand_.size() && cand_[k].first <= tmax; ++k) {
      const int j = cand_[k].second;
      if (std::abs(alpha_[j]) > best_abs) {
        best_abs = std::abs(alpha_[j]);
        q = j;
      }
    }
    if (best_abs < kSmallPivot && !allow_small) {
      rejected[r] = 1;
      any_rejected = true;
      continue;
    }

    col_.assign(m_, 0.0);
    {
      auto c = column(q);
      for (std::size_t k = 0; k < c.rows.size(); ++k) col_[c.rows[k]] = c.values[k];
    }
    lu_.ftran(col_);
    const double arq = col_[r];
    const double aq = alpha_[q];
    if (std::abs(arq - aq) > 1e-7 * (1.0 + std::abs(arq)) ||
        std::abs(arq) < kPivotTol) {
      if (++retries > kMaxNumericalRetries) {
        message_ = "unstable pivot in dual simplex";
        return Outcome::Numerical;
      }
      if (lu_.num_updates() == 0) {
        rejected[r] = 1;
        any_rejected = true;
        continue;
      }
      if (!refresh()) return Outcome::Numerical;
      continue;
    }

    // Bound flips of the passed breakpoints.
    if (first > 0) {
      flip_.assign(m_, 0.0);
      for (std::size_t k = 0; k < first; ++k) {
        const int j = cand_[k].second;
        const bool up = status_[j] == Status::Lower;
        const double delta = up ? up_[j] - lo_[j] : lo_[j] - up_[j];
        status_[j] = up ? Status::Upper : Status::Lower;
        x_[j] = up ? up_[j] : lo_[j];
        auto c = column(j);
        for (std::size_t e = 0; e < c.rows.size(); ++e) {
          flip_[c.rows[e]] += c.values[e] * delta;
        }
      }
      lu_.ftran(flip_);
      for (int p = 0; p < m_; ++p) {
        if (flip_[p] != 0.0) x_[head_[p]] -= flip_[p];
      }
    }

    double theta_d = d_[q] / aq;
    if (s * theta_d < 0.0) theta_d = 0.0;
    for (int j : alpha_index_) d_[j] -= theta_d * alpha_[j];
    d_[jr] = -theta_d;
    d_[q] = 0.0;

    const double theta_p = (x_[jr] - target) / arq;
    for (int p = 0; p < m_; ++p) {
      if (col_[p] != 0.0) x_[head_[p]] -= theta_p * col_[p];
    }
    x_[q] += theta_p;

    if (cfg_.dual_steepest_edge) {
      tau_ = rho_;
      lu_.ftran(tau_);
      const double wr = dse_[r];
      for (int p = 0; p < m_; ++p) {
        if (p == r || col_[p] == 0.0) continue;
        const double ratio = col_[p] / arq;
        dse_[p] = std::clamp(dse_[p] + ratio * (ratio * wr - 2.0 * tau_[p]),
                             ratio * ratio + 1e-12, kMaxWeight);
        if (!std::isfinite(dse_[p])) dse_[p] = kMaxWeight;
      }
      dse_[r] = std::clamp(wr / (arq * arq), 1e-12, kMaxWeight);
      if (!std::isfinite(dse_[r])) dse_[r] = kMaxWeight;
    }

    pivot(r, q, col_);
    retries = 0;
    x_[jr] = target;
    status_[jr] = to_lower ? Status::Lower : Status::Upper;
    if (lo_[jr] == up_[jr]) status_[jr] = Status::Lower;
    ++iterations_;
  }
}

LpEngine::Outcome LpEngine::primal_simplex() {
  int degenerate = 0;
  int retries = 0;
  bool was_phase1 = true;
  bland_ = false;
  std::vector<double>& y1 = tau_;
  for (;;) {
    if (out_of_budget()) return Outcome::IterLimit;
    if (needs_refactor()) {
      if (!refactor()) return Outcome::Numerical;
      compute_primal();
      was_phase1 = true;
    }

    const bool phase1 = max_primal_infeasibility() > kPrimalTol;
    if (phase1) {
      y1.assign(m_, 0.0);
      for (int p = 0; p < m_; ++p) {
        const int j = head_[p];
        if (x_[j] < lo_[j] - kPrimalTol) y1[p] = -1.0;
        if (x_[j] > up_[j] + kPrimalTol) y1[p] = 1.0;
      }
      lu_.btran(y1);
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == Status::Basic) {
          d_[j] = 0.0;
        } else if (j < n_) {
          double v = 0.0;
          for (int e = a_start_[j]; e < a_start_[j + 1]; ++e) {
            v -= y1[a_row_[e]] * a_val_[e];
          }
          d_[j] = v;
        } else {
          d_[j] = y1[j - n_];
        }
      }
    } else if (was_phase1) {
      compute_duals(cost_);
    }
    was_phase1 = phase1;

    int q = -1;
    double best = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      const double dj = d_[j];
      double score = 0.0;
      switch (status_[j]) {
        case Status::Basic:
          continue;
        case Status::Lower:
          if (lo_[j] == up_[j]) continue;
          score = -dj;
          break;
        case Status::Upper:
          score = dj;
          break;
        case Status::Free:
          score = std::abs(dj);
          break;
      }
      if (score <= kDualTol) continue;
      if (bland_) {
        q = j;
        break;
      }
      if (score > best) {
        best = score;
        q = j;
      }
    }
    if (q < 0) {
      if (phase1) {
        farkas_ = y1;
        return Outcome::Infeasible;
      }
      return Outcome::Optimal;
    }
    const double dir = d_[q] < 0.0 ? 1.0 : -1.0;

    col_.assign(m_, 0.0);
    {
      auto c = column(q);
      for (std::size_t k = 0; k < c.rows.size(); ++k) col_[c.rows[k]] = c.values[k];
    }
    lu_.ftran(col_);

    auto limits = [&](int j, double& lb, double& ub) {
      lb = lo_[j];
      ub = up_[j];
      if (phase1) {
        if (x_[j] < lo_[j] - kPrimalTol) {
          lb = -kInf;
          ub = lo_[j];
        } else if (x_[j] > up_[j] + kPrimalTol) {
          lb = up_[j];
          ub = kInf;
        }
      }
    };

    double tmax = kInf;
    for (int p = 0; p < m_; ++p) {
      const double a = dir * col_[p];
      if (std::abs(a) <= kPivotTol) continue;
      const int j = head_[p];
      double lb, ub;
      limits(j, lb, ub);
      if (a > 0.0 && std::isfinite(lb)) {
        tmax = std::min(tmax, (x_[j] - lb + kPrimalTol) / a);
      } else if (a < 0.0 && std::isfinite(ub)) {
        tmax = std::min(tmax, (ub - x_[j] + kPrimalTol) / -a);
      }
    }
    const double flip = (status_[q] != Status::Free && std::isfinite(lo_[q]) &&
                         std::isfinite(up_[q]))
                            ? up_[q] - lo_[q]
                            : kInf;
    if (!std::isfinite(tmax) && !std::isfinite(flip)) {
      if (phase1) {
        message_ = "phase-1 ray";
        return Outcome::Numerical;
      }
      return Outcome::Unbounded;
    }
    if (flip <= tmax) {
      for (int p = 0; p < m_; ++p) {
        if (col_[p] != 0.0) x_[head_[p]] -= dir * flip * col_[p];
      }
      const bool to_upper = dir > 0.0;
      x_[q] = to_upper ? up_[q] : lo_[q];
      status_[q] = to_upper ? Status::Upper : Status::Lower;
      ++iterations_;
      continue;
    }

    int r = -1;
    double best_abs = 0.0;
    double t = 0.0;
    double leave_at = 0.0;
    for (int p = 0; p < m_; ++p) {
      const double a = dir * col_[p];
      if (std::abs(a) <= kPivotTol) continue;
      const int j = head_[p];
      double lb, ub;
      limits(j, lb, ub);
      double ratio;
      double bound;
      if (a > 0.0 && std::isfinite(lb)) {
        ratio = (x_[j] - lb) / a;
        bound = lb;
      } else if (a < 0.0 && std::isfinite(ub)) {
        ratio = (ub - x_[j]) / -a;
        bound = ub;
      } else {
        continue;
      }
      if (ratio > tmax) continue;
      bool take;
      if (bland_) {
        take = r < 0 || ratio < t ||
               (ratio == t && head_[p] < head_[r]);
      } else {
        take = std::abs(a) > best_abs;
      }
      if (take) {
        r = p;
        best_abs = std::abs(a);
        t = ratio;
        leave_at = bound;
      }
    }
    if (r < 0) {
      message_ = "primal ratio test failed";
      return Outcome::Numerical;
    }
    t = std::max(t, 0.0);
    if (t < 1e-12) {
      if (++degenerate > 200) bland_ = true;
    } else {
      degenerate = 0;
      bland_ = false;
    }

    const int jr = head_[r];
    if (!phase1) {
      rho_.assign(m_, 0.0);
      rho_[r] = 1.0;
      lu_.btran(rho_);
      dot_row(rho_, alpha_, alpha_index_);
      const double aq = alpha_[q];
      if (std::abs(aq - col_[r]) > 1e-7 * (1.0 + std::abs(col_[r]))) {
        if (++retries > kMaxNumericalRetries) {
          message_ = "unstable pivot in primal simplex";
          return Outcome::Numerical;
        }
        if (!refactor()) return Outcome::Numerical;
        compute_primal();
        was_phase1 = true;
        continue;
      }
      const double theta_d = d_[q] / aq;
      for (int j : alpha_index_) d_[j] -= theta_d * alpha_[j];
      d_[jr] = -theta_d;
      d_[q] = 0.0;
    }

    for (int p = 0; p < m_; ++p) {
      if (col_[p] != 0.0) x_[head_[p]] -= dir * t * col_[p];
    }
    x_[q] += dir * t;
    pivot(r, q, col_);
    x_[jr] = leave_at;
    status_[jr] = leave_at == up_[jr] && lo_[jr] != up_[jr] ? Status::Upper
                                                            : Status::Lower;
    ++iterations_;
  }
}

SolveStatus LpEngine::solve() {
  start_ = std::chrono::steady_clock::now();
  message_.clear();
  farkas_.clear();
  if (!factored_ && !refactor()) {
    slack_basis();
    if (!refactor()) return SolveStatus::NumericalError;
  }
  compute_primal();
  perturb_and_shift();
  Outcome o = dual_simplex();

  auto dual_infeasibility = [&] {
    double worst = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      switch (status_[j]) {
        case Status::Basic:
          break;
        case Status::Lower:
          if (lo_[j] != up_[j]) worst = std::max(worst, -d_[j]);
          break;
        case Status::Upper:
          worst = std::max(worst, d_[j]);
          break;
        case Status::Free:
          worst = std::max(worst, std::abs(d_[j]));
          break;
      }
    }
    return worst;
  };

  for (int round = 0; round < 6; ++round) {
    if (o == Outcome::IterLimit) {
      return iterations_ >= cfg_.max_iterations ? SolveStatus::IterLimit
                                                : SolveStatus::TimeLimit;
    }
    if (o == Outcome::Unbounded) return SolveStatus::Unbounded;
    if (o == Outcome::Infeasible) {
      // Accept only a certificate that separates in scaled space.
      std::vector<double> full(n_ + m_, 0.0);
      for (int i = 0; i < m_; ++i) {
        const double v = farkas_[i];
        if (v == 0.0) continue;
        for (int e = r_start_[i]; e < r_start_[i + 1]; ++e) {
          full[r_col_[e]] += v * r_val_[e];
        }
        full[n_ + i] = -v;
      }
      double lo_sum = 0.0;
      double up_sum = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        const double a = full[j];
        if (a == 0.0) continue;
        // Round-off on columns without a finite bound would swamp the sums.
        if (std::abs(a) <= kDualTol && (lo_[j] == -kInf || up_[j] == kInf)) continue;
        lo_sum += a > 0.0 ? a * lo_[j] : a * up_[j];
        up_sum += a > 0.0 ? a * up_[j] : a * lo_[j];
      }
      if (lo_sum > 1e-9 || up_sum < -1e-9) return SolveStatus::Infeasible;
      if (!refactor()) return SolveStatus::NumericalError;
      compute_primal();
      o = primal_simplex();
      continue;
    }
    if (o == Outcome::Numerical) {
      if (!refactor()) {
        slack_basis();
        if (!refactor()) return SolveStatus::NumericalError;
      }
      compute_primal();
      o = primal_simplex();
      if (o == Outcome::Numerical) {
        slack_basis();
        if (!refactor()) return SolveStatus::NumericalError;
        compute_primal();
        o = primal_simplex();
        if (o == Outcome::Numerical) return SolveStatus::NumericalError;
      }
      continue;
    }
    // Optimal for the working costs: verify on fresh factors.
    if (!refactor()) return SolveStatus::NumericalError;
    compute_primal();
    compute_duals(cost_);
    const bool pfeas = max_primal_infeasibility() <= kPrimalTol;
    const bool dfeas = dual_infeasibility() <= kDualTol;
    if (pfeas && dfeas) {
      return SolveStatus::Optimal;
    }
    if (!pfeas && dfeas) {
      work_cost_ = cost_;
      o = dual_simplex();
    } else {
      o = primal_simplex();
    }
  }
  message_ = "simplex did not settle";
  return SolveStatus::NumericalError;
}

double LpEngine::objective() const {
  double v = 0.0;
  for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
  return v / objscale_ + obj_constant_;
}

std::vector<double> LpEngine::primal() const {
  std::vector<double> x(n_);
  for (int j = 0; j < n_; ++j) x[j] = x_[j] * cscale_[j];
  return x;
}

std::vector<double> LpEngine::row_activity() const {
  std::vector<double> r(m_);
  for (int i = 0; i < m_; ++i) r[i] = x_[n_ + i] * cscale_[n_ + i];
  return r;
}

std::vector<double> LpEngine::duals() const {
  std::vector<double> y(m_);
  for (int i = 0; i < m_; ++i) y[i] = y_[i] * rscale_[i] / objscale_;
  return y;
}

std::vector<double> LpEngine::reduced_costs() const {
  std::vector<double> d(n_);
  for (int j = 0; j < n_; ++j) d[j] = d_[j] / (cscale_[j] * objscale_);
  return d;
}

std::vector<double> LpEngine::farkas() const {
  std::vector<double> y(m_, 0.0);
  if (farkas_.empty()) return y;
  for (int i = 0; i < m_; ++i) y[i] = farkas_[i] * rscale_[i];
  return y;
}

}  // namespace ots::detail
