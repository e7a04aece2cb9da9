#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ots::detail {

// Sparse LU factorization of a simplex basis with product-form updates.
//
// The basis B is m x m; its columns are addressed by basis position and its
// rows by constraint row. ftran solves B x = a (a row-indexed, x
// position-indexed); btran solves B' y = e (e position-indexed, y
// row-indexed). Both loop over pivots and skip zero entries, so sparse
// right-hand sides cost little more than O(m).
class LuFactor {
 public:
  struct SparseColumn {
    std::span<const int> rows;
    std::span<const double> values;
  };

  struct Result {
    // Positions that could not be pivoted and the rows left without a
    // pivot; same length. Empty when B is nonsingular.
    std::vector<int> singular_positions;
    std::vector<int> free_rows;
  };

  // `column(pos)` returns column `pos` of B.
  template <typename ColumnFn>
  Result factorize(int m, ColumnFn&& column) {
    begin(m);
    for (int pos = 0; pos < m; ++pos) {
      SparseColumn c = column(pos);
      for (std::size_t k = 0; k < c.rows.size(); ++k) {
        if (c.values[k] != 0.0) add_entry(c.rows[k], pos, c.values[k]);
      }
    }
    return run();
  }

  void ftran(std::vector<double>& x) const;
  void btran(std::vector<double>& y) const;

  // Records the basis change at `pos`, given the ftran'd entering column.
  void update(int pos, const std::vector<double>& column);
  int num_updates() const { return static_cast<int>(eta_pos_.size()); }
  long long eta_nonzeros() const {
    return static_cast<long long>(eta_index_.size());
  }
  long long factor_nonzeros() const {
    return static_cast<long long>(l_row_.size() + u_pos_.size());
  }

  double pivot_threshold = 0.1;
  double pivot_abs_tol = 1e-11;

 private:
  void begin(int m);
  void add_entry(int row, int pos, double value);
  Result run();

  void eliminate_column_singleton(int row, int pos);
  void eliminate_row_singleton(int row, int pos);
  bool markowitz_step();
  void pivot_general(int row, int pos);
  void record_pivot(int row, int pos, double value);
  void remove_from_col(int pos, int row);
  void remove_from_row(int row, int pos);
  double find_in_row(int row, int pos) const;
  double column_max(int pos) const;
  void set_row_count(int row);
  void set_col_count(int pos);
  void finish();

  int m_ = 0;

  // Active submatrix during factorization.
  std::vector<std::vector<std::pair<int, double>>> arow_;  // row -> (pos, v)
  std::vector<std::vector<int>> acol_;                     // pos -> rows
  std::vector<std::uint8_t> row_done_, col_done_;
  // Count buckets (doubly linked lists) for Markowitz search.
  std::vector<int> rb_head_, rb_next_, rb_prev_, rb_count_;
  std::vector<int> cb_head_, cb_next_, cb_prev_, cb_count_;
  void bucket_insert(std::vector<int>& head, std::vector<int>& next,
                     std::vector<int>& prev, std::vector<int>& count, int id,
                     int c);
  void bucket_remove(std::vector<int>& head, std::vector<int>& next,
                     std::vector<int>& prev, std::vector<int>& count, int id);
  std::vector<int> singleton_cols_, singleton_rows_;
  std::vector<int> mark_;
  std::vector<double> work_;

  // Factors in pivot order k = 0..m-1.
  std::vector<int> piv_row_, piv_pos_;
  std::vector<double> piv_val_;
  // L column k: (row, multiplier) for rows pivoted after k.
  std::vector<int> l_start_{0}, l_row_;
  std::vector<double> l_val_;
  // U row k: (pos, value) for positions pivoted after k.
  std::vector<int> u_start_{0}, u_pos_;
  std::vector<double> u_val_;
  // Transposed copies for the other solve direction.
  std::vector<int> lt_start_, lt_piv_;  // by row: (pivot k, multiplier)
  std::vector<double> lt_val_;
  std::vector<int> ut_start_, ut_row_;  // by pivot k': (row of k, value)
  std::vector<double> ut_val_;

  // Product-form etas.
  std::vector<int> eta_pos_;
  std::vector<double> eta_pivot_;
  std::vector<int> eta_start_{0}, eta_index_;
  std::vector<double> eta_value_;

  mutable std::vector<double> scratch_;
};

}  // namespace ots::detail
