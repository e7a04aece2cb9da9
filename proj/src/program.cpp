#include "ots/program.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ots {

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  constant_ += other.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
  terms_.reserve(terms_.size() + other.terms_.size());
  for (const auto& t : other.terms_) terms_.push_back({t.var, -t.coef});
  constant_ -= other.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (auto& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

void LinearExpr::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  terms_ = std::move(merged);
}

bool LinearExpr::is_constant() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.coef == 0.0; });
}

double LinearExpr::evaluate(std::span<const double> x) const {
  double v = constant_;
  for (const auto& t : terms_) v += t.coef * x[t.var];
  return v;
}

LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
LinearExpr operator*(double s, LinearExpr a) { return a *= s; }

VarBlock MathProgram::add_block(const std::string& name, int rows, int cols,
                                double lower, double upper, VarKind kind) {
  if (find_block(name) != nullptr) {
    throw std::logic_error("duplicate variable block '" + name + "'");
  }
  VarBlock b{name, num_vars(), rows, cols, kind};
  const int count = rows * cols;
  const int id = static_cast<int>(blocks_.size());
  blocks_.push_back(b);
  lower_.insert(lower_.end(), count, lower);
  upper_.insert(upper_.end(), count, upper);
  cost_.insert(cost_.end(), count, 0.0);
  kind_.insert(kind_.end(), count, kind);
  var_block_.insert(var_block_.end(), count, id);
  return b;
}

int MathProgram::add_row(const LinearExpr& expr, Sense sense, double rhs,
                         std::string name) {
  switch (sense) {
    case Sense::LessEqual:
      return add_ranged_row(expr, -kInf, rhs, std::move(name));
    case Sense::GreaterEqual:
      return add_ranged_row(expr, rhs, kInf, std::move(name));
    case Sense::Equal:
      break;
  }
  return add_ranged_row(expr, rhs, rhs, std::move(name));
}

int MathProgram::add_ranged_row(const LinearExpr& expr, double lower,
                                double upper, std::string name) {
  LinearExpr e = expr;
  e.normalize();
  for (const auto& t : e.terms()) {
    if (t.var < 0 || t.var >= num_vars()) {
      throw std::logic_error("row '" + name + "' references undeclared variable");
    }
    col_index_.push_back(t.var);
    values_.push_back(t.coef);
  }
  row_start_.push_back(static_cast<long long>(col_index_.size()));
  row_lower_.push_back(lower - e.constant());
  row_upper_.push_back(upper - e.constant());
  row_names_.push_back(std::move(name));
  return num_rows() - 1;
}

void MathProgram::set_objective(const LinearExpr& expr) {
  std::fill(cost_.begin(), cost_.end(), 0.0);
  for (const auto& t : expr.terms()) cost_[t.var] += t.coef;
  obj_constant_ = expr.constant();
}

void MathProgram::set_var_bounds(int var, double lower, double upper) {
  lower_[var] = lower;
  upper_[var] = upper;
}

int MathProgram::num_binaries() const {
  return static_cast<int>(
      std::count(kind_.begin(), kind_.end(), VarKind::Binary));
}

std::string MathProgram::var_name(int j) const {
  const VarBlock& b = blocks_[var_block_[j]];
  const int local = j - b.first;
  if (b.cols == 1) return b.name + "[" + std::to_string(local) + "]";
  return b.name + "[" + std::to_string(local / b.cols) + "," +
         std::to_string(local % b.cols) + "]";
}

const VarBlock& MathProgram::block(const std::string& name) const {
  const VarBlock* b = find_block(name);
  if (b == nullptr) throw std::out_of_range("no variable block '" + name + "'");
  return *b;
}

const VarBlock* MathProgram::find_block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

int MathProgram::block_of(int var) const { return var_block_[var]; }

Sense MathProgram::row_sense(int i) const {
  if (row_lower_[i] == row_upper_[i]) return Sense::Equal;
  if (std::isinf(row_upper_[i])) return Sense::GreaterEqual;
  return Sense::LessEqual;
}

std::span<const int> MathProgram::row_indices(int i) const {
  return {col_index_.data() + row_start_[i],
          static_cast<std::size_t>(row_start_[i + 1] - row_start_[i])};
}

std::span<const double> MathProgram::row_values(int i) const {
  return {values_.data() + row_start_[i],
          static_cast<std::size_t>(row_start_[i + 1] - row_start_[i])};
}

double MathProgram::objective_value(std::span<const double> x) const {
  double v = obj_constant_;
  for (int j = 0; j < num_vars(); ++j) v += cost_[j] * x[j];
  return v;
}

double MathProgram::row_activity(int i, std::span<const double> x) const {
  double v = 0.0;
  auto idx = row_indices(i);
  auto val = row_values(i);
  for (std::size_t k = 0; k < idx.size(); ++k) v += val[k] * x[idx[k]];
  return v;
}

double MathProgram::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max({worst, lower_[j] - x[j], x[j] - upper_[j]});
  }
  for (int i = 0; i < num_rows(); ++i) {
    const double a = row_activity(i, x);
    worst = std::max({worst, row_lower_[i] - a, a - row_upper_[i]});
  }
  return worst;
}

void MathProgram::check_invariants() const {
  for (int v : col_index_) {
    if (v < 0 || v >= num_vars()) {
      throw std::logic_error("nonzero references undeclared variable");
    }
  }
  for (int j = 0; j < num_vars(); ++j) {
    if (kind_[j] == VarKind::Binary && blocks_[var_block_[j]].name != "z") {
      throw std::logic_error("binary variable " + var_name(j) +
                             " outside the z block");
    }
  }
  const auto& c = metadata_.counts;
  auto expect = [&](const char* key, long long actual) {
    auto it = c.find(key);
    if (it != c.end() && it->second != actual) {
      throw std::logic_error(std::string("metadata count '") + key +
                             "' = " + std::to_string(it->second) +
                             " but program has " + std::to_string(actual));
    }
  };
  expect("n_rows", num_rows());
  expect("n_vars_bin", num_binaries());
  expect("n_vars_cont", num_vars() - num_binaries());
}

}  // namespace ots
