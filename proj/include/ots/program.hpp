#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ots {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind : std::uint8_t { Continuous, Binary };
enum class Sense : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Term {
  int var;
  double coef;
};

// Affine expression sum_k coef_k * x_{var_k} + constant.
class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by intent

  static LinearExpr variable(int var, double coef = 1.0) {
    LinearExpr e;
    e.add(var, coef);
    return e;
  }

  LinearExpr& add(int var, double coef) {
    if (coef != 0.0) terms_.push_back({var, coef});
    return *this;
  }
  LinearExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator-=(const LinearExpr& other);
  LinearExpr& operator*=(double s);

  // Merges duplicate variables, drops exact zeros, sorts by index.
  void normalize();

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  bool is_constant() const;

  double evaluate(std::span<const double> x) const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

LinearExpr operator+(LinearExpr a, const LinearExpr& b);
LinearExpr operator-(LinearExpr a, const LinearExpr& b);
LinearExpr operator*(double s, LinearExpr a);

struct VarBlock {
  std::string name;
  int first = 0;
  int rows = 0;
  int cols = 1;  // cols > 1 marks a matrix block stored row-major
  VarKind kind = VarKind::Continuous;

  int size() const { return rows * cols; }
  int at(int r, int c = 0) const { return first + r * cols + c; }
};

struct ProgramMetadata {
  std::string builder;
  std::optional<int> scenarios;
  // Named structural counts used by audits and the scaling benchmark,
  // e.g. "rows_first_stage", "rows_per_scenario".
  std::map<std::string, long long> counts;
  std::vector<std::string> notes;
};

// Sparse linear/mixed-binary program: min c'x + c0 subject to row bounds
// lo_i <= a_i'x <= up_i and column bounds. Rows carry a sense for export;
// ranged rows are LessEqual with a finite range.
class MathProgram {
 public:
  // Adds a block of `rows * cols` variables sharing bounds and kind and
  // returns it. Names are generated as `name[r]` or `name[r,c]`.
  VarBlock add_block(const std::string& name, int rows, int cols, double lower,
                     double upper, VarKind kind = VarKind::Continuous);
  VarBlock add_block(const std::string& name, int size, double lower,
                     double upper, VarKind kind = VarKind::Continuous) {
    return add_block(name, size, 1, lower, upper, kind);
  }

  // The expression's constant is moved to the right-hand side.
  int add_row(const LinearExpr& expr, Sense sense, double rhs,
              std::string name);
  // lower <= expr <= upper with both sides possibly infinite.
  int add_ranged_row(const LinearExpr& expr, double lower, double upper,
                     std::string name);

  void set_objective(const LinearExpr& expr);
  void set_objective_coef(int var, double coef) { cost_[var] = coef; }
  void set_var_bounds(int var, double lower, double upper);

  int num_vars() const { return static_cast<int>(lower_.size()); }
  int num_rows() const { return static_cast<int>(row_lower_.size()); }
  long long num_nonzeros() const {
    return static_cast<long long>(col_index_.size());
  }
  int num_binaries() const;

  double var_lower(int j) const { return lower_[j]; }
  double var_upper(int j) const { return upper_[j]; }
  VarKind var_kind(int j) const { return kind_[j]; }
  std::string var_name(int j) const;
  const std::vector<VarBlock>& blocks() const { return blocks_; }
  const VarBlock& block(const std::string& name) const;
  const VarBlock* find_block(const std::string& name) const;
  int block_of(int var) const;

  const std::vector<double>& costs() const { return cost_; }
  double objective_constant() const { return obj_constant_; }

  double row_lower(int i) const { return row_lower_[i]; }
  double row_upper(int i) const { return row_upper_[i]; }
  Sense row_sense(int i) const;
  const std::string& row_name(int i) const { return row_names_[i]; }
  std::span<const int> row_indices(int i) const;
  std::span<const double> row_values(int i) const;

  ProgramMetadata& metadata() { return metadata_; }
  const ProgramMetadata& metadata() const { return metadata_; }

  double objective_value(std::span<const double> x) const;
  double row_activity(int i, std::span<const double> x) const;
  // Largest bound or row violation of x (absolute).
  double max_violation(std::span<const double> x) const;

  // Throws std::logic_error when a structural invariant is broken: a
  // nonzero references an undeclared variable, a binary lives outside the
  // `z` block, or a metadata count disagrees with the actual dimensions.
  void check_invariants() const;

 private:
  std::vector<VarBlock> blocks_;
  std::vector<int> var_block_;
  std::vector<double> lower_, upper_, cost_;
  std::vector<VarKind> kind_;
  double obj_constant_ = 0.0;

  std::vector<double> row_lower_, row_upper_;
  std::vector<std::string> row_names_;
  std::vector<long long> row_start_{0};
  std::vector<int> col_index_;
  std::vector<double> values_;

  ProgramMetadata metadata_;
};

}  // namespace ots
