#include "solver/lu_factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ots::detail {

void LuFactor::begin(int m) {
  m_ = m;
  arow_.resize(m);
  acol_.resize(m);
  for (auto& r : arow_) r.clear();
  for (auto& c : acol_) c.clear();
}

void LuFactor::add_entry(int row, int pos, double value) {
  arow_[row].emplace_back(pos, value);
  acol_[pos].push_back(row);
}

void LuFactor::bucket_insert(std::vector<int>& head, std::vector<int>& next,
                             std::vector<int>& prev, std::vector<int>& count,
                             int id, int c) {
  count[id] = c;
  prev[id] = -1;
  next[id] = head[c];
  if (head[c] != -1) prev[head[c]] = id;
  head[c] = id;
}

void LuFactor::bucket_remove(std::vector<int>& head, std::vector<int>& next,
                             std::vector<int>& prev, std::vector<int>& count,
                             int id) {
  const int c = count[id];
  if (c < 0) return;
  if (prev[id] != -1) {
    next[prev[id]] = next[id];
  } else {
    head[c] = next[id];
  }
  if (next[id] != -1) prev[next[id]] = prev[id];
  count[id] = -1;
}

void LuFactor::set_row_count(int row) {
  bucket_remove(rb_head_, rb_next_, rb_prev_, rb_count_, row);
  bucket_insert(rb_head_, rb_next_, rb_prev_, rb_count_, row,
                static_cast<int>(arow_[row].size()));
}

void LuFactor::set_col_count(int pos) {
  bucket_remove(cb_head_, cb_next_, cb_prev_, cb_count_, pos);
  bucket_insert(cb_head_, cb_next_, cb_prev_, cb_count_, pos,
                static_cast<int>(acol_[pos].size()));
}

double LuFactor::find_in_row(int row, int pos) const {
  for (const auto& [p, v] : arow_[row]) {
    if (p == pos) return v;
  }
  return 0.0;
}

double LuFactor::column_max(int pos) const {
  double best = 0.0;
  for (int r : acol_[pos]) best = std::max(best, std::abs(find_in_row(r, pos)));
  return best;
}

void LuFactor::remove_from_col(int pos, int row) {
  auto& c = acol_[pos];
  auto it = std::find(c.begin(), c.end(), row);
  if (it != c.end()) {
    *it = c.back();
    c.pop_back();
  }
}

void LuFactor::remove_from_row(int row, int pos) {
  auto& r = arow_[row];
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k].first == pos) {
      r[k] = r.back();
      r.pop_back();
      return;
    }
  }
}

void LuFactor::record_pivot(int row, int pos, double value) {
  piv_row_.push_back(row);
  piv_pos_.push_back(pos);
  piv_val_.push_back(value);
  l_start_.push_back(static_cast<int>(l_row_.size()));
  u_start_.push_back(static_cast<int>(u_pos_.size()));
  row_done_[row] = 1;
  col_done_[pos] = 1;
  bucket_remove(rb_head_, rb_next_, rb_prev_, rb_count_, row);
  bucket_remove(cb_head_, cb_next_, cb_prev_, cb_count_, pos);
  arow_[row].clear();
  acol_[pos].clear();
}

void LuFactor::eliminate_column_singleton(int row, int pos) {
  const double v = find_in_row(row, pos);
  for (const auto& [c, val] : arow_[row]) {
    if (c == pos) continue;
    u_pos_.push_back(c);
    u_val_.push_back(val);
    remove_from_col(c, row);
    set_col_count(c);
  }
  record_pivot(row, pos, v);
}

void LuFactor::eliminate_row_singleton(int row, int pos) {
  const double v = find_in_row(row, pos);
  for (int r : acol_[pos]) {
    if (r == row) continue;
    const double a = find_in_row(r, pos);
    l_row_.push_back(r);
    l_val_.push_back(a / v);
    remove_from_row(r, pos);
    set_row_count(r);
  }
  record_pivot(row, pos, v);
}

void LuFactor::pivot_general(int row, int pos) {
  const double v = find_in_row(row, pos);
  // Scatter the pivot row.
  for (const auto& [c, val] : arow_[row]) {
    if (c == pos) continue;
    work_[c] = val;
    mark_[c] = 1;
  }
  const std::vector<int> rows = acol_[pos];
  std::vector<int> touched;
  for (int r : rows) {
    if (r == row) continue;
    const double a = find_in_row(r, pos);
    const double l = a / v;
    l_row_.push_back(r);
    l_val_.push_back(l);
    remove_from_row(r, pos);
    auto& target = arow_[r];
    touched.clear();
    for (auto& [c, val] : target) {
      if (mark_[c] == 1) {
        val -= l * work_[c];
        mark_[c] = 2;
        touched.push_back(c);
      }
    }
    for (const auto& [c, val] : arow_[row]) {
      if (c == pos) continue;
      if (mark_[c] == 1) {
        target.emplace_back(c, -l * val);
        acol_[c].push_back(r);
        set_col_count(c);
      } else {
        mark_[c] = 1;  // reset for the next row
      }
    }
    for (int c : touched) mark_[c] = 1;
    set_row_count(r);
  }
  for (const auto& [c, val] : arow_[row]) {
    if (c == pos) continue;
    u_pos_.push_back(c);
    u_val_.push_back(val);
    mark_[c] = 0;
    remove_from_col(c, row);
    set_col_count(c);
  }
  record_pivot(row, pos, v);
}

bool LuFactor::markowitz_step() {
  constexpr int kSearchLimit = 4;
  int best_row = -1;
  int best_pos = -1;
  long long best_mc = std::numeric_limits<long long>::max();
  double best_abs = 0.0;
  int searched = 0;
  std::vector<int> dead_cols;

  auto consider = [&](int r, int pos, double a, long long mc) {
    if (mc < best_mc || (mc == best_mc && a > best_abs)) {
      best_mc = mc;
      best_abs = a;
      best_row = r;
      best_pos = pos;
    }
  };

  for (int cnt = 1; cnt <= m_; ++cnt) {
    for (int pos = cb_head_[cnt]; pos != -1; pos = cb_next_[pos]) {
      const double cmax = column_max(pos);
      if (cmax <= pivot_abs_tol) {
        dead_cols.push_back(pos);
        continue;
      }
      for (int r : acol_[pos]) {
        const double a = std::abs(find_in_row(r, pos));
        if (a >= pivot_threshold * cmax && a > pivot_abs_tol) {
          consider(r, pos, a,
                   static_cast<long long>(arow_[r].size() - 1) * (cnt - 1));
        }
      }
      if (best_row >= 0) {
        ++searched;
        if (best_mc <= static_cast<long long>(cnt - 1) * (cnt - 1) ||
            searched >= kSearchLimit) {
          goto done;
        }
      }
    }
    for (int r = rb_head_[cnt]; r != -1; r = rb_next_[r]) {
      for (const auto& [pos, val] : arow_[r]) {
        const double a = std::abs(val);
        if (a <= pivot_abs_tol) continue;
        const double cmax = column_max(pos);
        if (a >= pivot_threshold * cmax) {
          consider(r, pos, a,
                   static_cast<long long>(cnt - 1) * (acol_[pos].size() - 1));
        }
      }
      if (best_row >= 0) {
        ++searched;
        if (best_mc <= static_cast<long long>(cnt - 1) * cnt ||
            searched >= kSearchLimit) {
          goto done;
        }
      }
    }
  }
done:
  for (int pos : dead_cols) {
    // Numerically empty column: leave it unpivoted (singular).
    for (int r : acol_[pos]) {
      remove_from_row(r, pos);
      set_row_count(r);
    }
    acol_[pos].clear();
    bucket_remove(cb_head_, cb_next_, cb_prev_, cb_count_, pos);
    col_done_[pos] = 2;
  }
  if (best_row < 0) return !dead_cols.empty();
  pivot_general(best_row, best_pos);
  return true;
}

LuFactor::Result LuFactor::run() {
  const int m = m_;
  piv_row_.clear();
  piv_pos_.clear();
  piv_val_.clear();
  l_start_.assign(1, 0);
  l_row_.clear();
  l_val_.clear();
  u_start_.assign(1, 0);
  u_pos_.clear();
  u_val_.clear();
  eta_pos_.clear();
  eta_pivot_.clear();
  eta_start_.assign(1, 0);
  eta_index_.clear();
  eta_value_.clear();
  row_done_.assign(m, 0);
  col_done_.assign(m, 0);
  mark_.assign(m, 0);
  work_.assign(m, 0.0);
  rb_head_.assign(m + 2, -1);
  cb_head_.assign(m + 2, -1);
  rb_next_.assign(m, -1);
  rb_prev_.assign(m, -1);
  rb_count_.assign(m, -1);
  cb_next_.assign(m, -1);
  cb_prev_.assign(m, -1);
  cb_count_.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    bucket_insert(rb_head_, rb_next_, rb_prev_, rb_count_, i,
                  static_cast<int>(arow_[i].size()));
    bucket_insert(cb_head_, cb_next_, cb_prev_, cb_count_, i,
                  static_cast<int>(acol_[i].size()));
  }

  while (static_cast<int>(piv_row_.size()) < m) {
    bool progress = true;
    while (progress) {
      progress = false;
      while (cb_head_[1] != -1) {
        const int pos = cb_head_[1];
        const int row = acol_[pos][0];
        if (std::abs(find_in_row(row, pos)) <= pivot_abs_tol) {
          remove_from_row(row, pos);
          set_row_count(row);
          acol_[pos].clear();
          bucket_remove(cb_head_, cb_next_, cb_prev_, cb_count_, pos);
          col_done_[pos] = 2;
          continue;
        }
        eliminate_column_singleton(row, pos);
        progress = true;
      }
      for (int row = rb_head_[1]; row != -1;) {
        const int next = rb_next_[row];
        const auto [pos, val] = arow_[row][0];
        const double a = std::abs(val);
        if (a > pivot_abs_tol && a >= pivot_threshold * column_max(pos)) {
          eliminate_row_singleton(row, pos);
          progress = true;
          break;
        }
        row = next;
      }
    }
    if (static_cast<int>(piv_row_.size()) == m) break;
    if (!markowitz_step()) break;
  }

  Result result;
  if (static_cast<int>(piv_row_.size()) < m) {
    for (int pos = 0; pos < m; ++pos) {
      if (col_done_[pos] != 1) result.singular_positions.push_back(pos);
    }
    for (int row = 0; row < m; ++row) {
      if (!row_done_[row]) result.free_rows.push_back(row);
    }
    return result;
  }
  finish();
  return result;
}

void LuFactor::finish() {
  const int m = m_;
  // L by row.
  lt_start_.assign(m + 1, 0);
  for (int r : l_row_) ++lt_start_[r + 1];
  for (int i = 0; i < m; ++i) lt_start_[i + 1] += lt_start_[i];
  lt_piv_.resize(l_row_.size());
  lt_val_.resize(l_row_.size());
  {
    std::vector<int> fill(lt_start_.begin(), lt_start_.end() - 1);
    for (int k = 0; k < m; ++k) {
      for (int e = l_start_[k]; e < l_start_[k + 1]; ++e) {
        const int slot = fill[l_row_[e]]++;
        lt_piv_[slot] = k;
        lt_val_[slot] = l_val_[e];
      }
    }
  }
  // U by column (pivot index of the column position).
  std::vector<int> piv_of_pos(m);
  for (int k = 0; k < m; ++k) piv_of_pos[piv_pos_[k]] = k;
  ut_start_.assign(m + 1, 0);
  for (int c : u_pos_) ++ut_start_[piv_of_pos[c] + 1];
  for (int k = 0; k < m; ++k) ut_start_[k + 1] += ut_start_[k];
  ut_row_.resize(u_pos_.size());
  ut_val_.resize(u_pos_.size());
  {
    std::vector<int> fill(ut_start_.begin(), ut_start_.end() - 1);
    for (int k = 0; k < m; ++k) {
      for (int e = u_start_[k]; e < u_start_[k + 1]; ++e) {
        const int slot = fill[piv_of_pos[u_pos_[e]]]++;
        ut_row_[slot] = piv_row_[k];
        ut_val_[slot] = u_val_[e];
      }
    }
  }
  scratch_.assign(m, 0.0);
}

void LuFactor::ftran(std::vector<double>& x) const {
  const int m = m_;
  for (int k = 0; k < m; ++k) {
    const double v = x[piv_row_[k]];
    if (v == 0.0) continue;
    for (int e = l_start_[k]; e < l_start_[k + 1]; ++e) {
      x[l_row_[e]] -= l_val_[e] * v;
    }
  }
  auto& out = scratch_;
  for (int k = m - 1; k >= 0; --k) {
    double v = x[piv_row_[k]];
    if (v != 0.0) {
      v /= piv_val_[k];
      for (int e = ut_start_[k]; e < ut_start_[k + 1]; ++e) {
        x[ut_row_[e]] -= ut_val_[e] * v;
      }
    }
    out[piv_pos_[k]] = v;
  }
  x.swap(out);
  const int n_eta = static_cast<int>(eta_pos_.size());
  for (int t = 0; t < n_eta; ++t) {
    const int p = eta_pos_[t];
    double v = x[p];
    if (v == 0.0) continue;
    v /= eta_pivot_[t];
    x[p] = v;
    for (int e = eta_start_[t]; e < eta_start_[t + 1]; ++e) {
      x[eta_index_[e]] -= eta_value_[e] * v;
    }
  }
}

void LuFactor::btran(std::vector<double>& y) const {
  const int m = m_;
  for (int t = static_cast<int>(eta_pos_.size()) - 1; t >= 0; --t) {
    const int p = eta_pos_[t];
    double s = y[p];
    for (int e = eta_start_[t]; e < eta_start_[t + 1]; ++e) {
      s -= eta_value_[e] * y[eta_index_[e]];
    }
    y[p] = s / eta_pivot_[t];
  }
  auto& w = scratch_;
  for (int k = 0; k < m; ++k) {
    double v = y[piv_pos_[k]];
    if (v != 0.0) {
      v /= piv_val_[k];
      for (int e = u_start_[k]; e < u_start_[k + 1]; ++e) {
        y[u_pos_[e]] -= u_val_[e] * v;
      }
    }
    w[piv_row_[k]] = v;
  }
  for (int k = m - 1; k >= 0; --k) {
    const int i = piv_row_[k];
    const double v = w[i];
    if (v == 0.0) continue;
    for (int e = lt_start_[i]; e < lt_start_[i + 1]; ++e) {
      w[piv_row_[lt_piv_[e]]] -= lt_val_[e] * v;
    }
  }
  y.swap(w);
}

void LuFactor::update(int pos, const std::vector<double>& column) {
  eta_pos_.push_back(pos);
  eta_pivot_.push_back(column[pos]);
  for (int i = 0; i < m_; ++i) {
    if (i != pos && std::abs(column[i]) > 1e-14) {
      eta_index_.push_back(i);
      eta_value_.push_back(column[i]);
    }
  }
  eta_start_.push_back(static_cast<int>(eta_index_.size()));
}

}  // namespace ots::detail
