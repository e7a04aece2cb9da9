#include "ots/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ots/errors.hpp"
#include "ots/program.hpp"
#include "ots/solver.hpp"

namespace ots {

namespace {

std::seed_seq make_seed(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed),
                       static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream),
                       static_cast<std::uint32_t>(stream >> 32)};
}

// max a'xi s.t. S xi <= t; NaN when infeasible, +inf when unbounded.
double polytope_max(const Eigen::MatrixXd& S, const Eigen::VectorXd& t,
                    const Eigen::VectorXd& a) {
  const int k = static_cast<int>(S.cols());
  MathProgram p;
  auto xi = p.add_block("xi", k, -kInf, kInf);
  for (int i = 0; i < S.rows(); ++i) {
    LinearExpr e;
    for (int j = 0; j < k; ++j) e.add(xi.at(j), S(i, j));
    p.add_row(e, Sense::LessEqual, t[i], "s" + std::to_string(i));
  }
  LinearExpr obj;
  for (int j = 0; j < k; ++j) obj.add(xi.at(j), -a[j]);
  p.set_objective(obj);
  auto rep = solve_lp(p);
  switch (rep.status) {
    case SolveStatus::Optimal:
      return -rep.objective;
    case SolveStatus::Unbounded:
      return kInf;
    case SolveStatus::Infeasible:
      return std::nan("");
    default:
      break;
  }
  throw NumericalError("support LP failed: " + to_string(rep.status));
}

Eigen::MatrixXd uniform_second_moment(const Eigen::VectorXd& mu,
                                      const Eigen::VectorXd& width) {
  Eigen::MatrixXd m = mu * mu.transpose();
  for (int k = 0; k < mu.size(); ++k) m(k, k) += width[k] * width[k] / 12.0;
  return m;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed) {
  auto seq = make_seed(seed, stream);
  engine_.seed(seq);
}

UncertaintyPolytope UncertaintyPolytope::from_halfspaces(
    Eigen::MatrixXd S, Eigen::VectorXd t, Eigen::VectorXd mu,
    std::optional<Eigen::MatrixXd> second_moment) {
  const int k = static_cast<int>(S.cols());
  if (t.size() != S.rows() || mu.size() != k) {
    throw ValidationError("polytope", "inconsistent dimensions");
  }
  for (int j = 0; j < k; ++j) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(k);
      a[j] = sign;
      const double v = polytope_max(S, t, a);
      if (std::isnan(v)) throw ValidationError("polytope", "support is empty");
      if (!std::isfinite(v)) {
        throw ValidationError("polytope", "support is unbounded");
      }
    }
  }
  if (k > 0) {
    // Chebyshev ball: max r s.t. S_i xi + |S_i| r <= t_i, r <= 1.
    MathProgram p;
    auto xi = p.add_block("xi", k, -kInf, kInf);
    auto r = p.add_block("r", 1, 0.0, 1.0);
    for (int i = 0; i < S.rows(); ++i) {
      LinearExpr e;
      for (int j = 0; j < k; ++j) e.add(xi.at(j), S(i, j));
      e.add(r.at(0), S.row(i).norm());
      p.add_row(e, Sense::LessEqual, t[i], "s" + std::to_string(i));
    }
    p.set_objective(LinearExpr::variable(r.at(0), -1.0));
    auto rep = solve_lp(p);
    if (rep.status != SolveStatus::Optimal || -rep.objective <= 1e-9) {
      throw NotFullDimensionalError("support has no interior point");
    }
  }
  if (((S * mu) - t).maxCoeff() > 1e-9 * (1.0 + t.cwiseAbs().maxCoeff())) {
    throw ValidationError("polytope.mu", "mean lies outside the support");
  }
  if (second_moment) {
    const Eigen::MatrixXd& m2 = *second_moment;
    if (m2.rows() != k || m2.cols() != k) {
      throw ValidationError("polytope.second_moment", "expected K x K");
    }
    const Eigen::MatrixXd cov = m2 - mu * mu.transpose();
    const double scale = 1.0 + cov.cwiseAbs().maxCoeff();
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw PSDError("second moment is not symmetric");
    }
    if (k > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
      if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
        throw PSDError("second moment minus mu mu' is not PSD");
      }
    }
  }
  UncertaintyPolytope poly;
  poly.S_ = std::move(S);
  poly.t_ = std::move(t);
  poly.mu_ = std::move(mu);
  poly.second_moment_ = std::move(second_moment);
  poly.embed_ = Eigen::MatrixXd::Identity(k, k);
  poly.offset_ = Eigen::VectorXd::Zero(k);
  return poly;
}

Eigen::VectorXd UncertaintyPolytope::to_full(const Eigen::VectorXd& reduced) const {
  return embed_ * reduced + offset_;
}

bool UncertaintyPolytope::contains(const Eigen::VectorXd& full, double tol) const {
  if (full.size() != full_dim()) return false;
  // embed_ is a column selection, so its transpose recovers the active part.
  const Eigen::VectorXd reduced = embed_.transpose() * (full - offset_);
  if ((to_full(reduced) - full).cwiseAbs().maxCoeff() > tol &&
      full.size() > 0) {
    return false;
  }
  if (num_rows() == 0) return true;
  return ((S_ * reduced) - t_).maxCoeff() <= tol;
}

UncertaintyPolytope box_support(const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi,
                                const std::optional<Eigen::VectorXd>& mu) {
  if (lo.size() != hi.size()) throw ValidationError("box", "size mismatch");
  for (int k = 0; k < lo.size(); ++k) {
    if (!(lo[k] < hi[k])) {
      throw EmptyBoxError("box coordinate " + std::to_string(k) +
                          " has xi_min >= xi_max");
    }
  }
  return reduced_box_support(lo, hi, mu);
}

UncertaintyPolytope reduced_box_support(const Eigen::VectorXd& lo,
                                        const Eigen::VectorXd& hi,
                                        const std::optional<Eigen::VectorXd>& mu) {
  const int full = static_cast<int>(lo.size());
  if (hi.size() != full || (mu && mu->size() != full)) {
    throw ValidationError("box", "size mismatch");
  }
  std::vector<int> active;
  for (int k = 0; k < full; ++k) {
    if (lo[k] > hi[k]) {
      throw EmptyBoxError("box coordinate " + std::to_string(k) +
                          " has xi_min > xi_max");
    }
    if (lo[k] < hi[k]) active.push_back(k);
  }
  const int k = static_cast<int>(active.size());
  UncertaintyPolytope poly;
  poly.embed_ = Eigen::MatrixXd::Zero(full, k);
  poly.offset_ = Eigen::VectorXd::Zero(full);
  for (int c = 0; c < full; ++c) {
    if (lo[c] == hi[c]) poly.offset_[c] = lo[c];
  }
  BoxBounds box{Eigen::VectorXd(k), Eigen::VectorXd(k)};
  Eigen::VectorXd center(k);
  for (int j = 0; j < k; ++j) {
    poly.embed_(active[j], j) = 1.0;
    box.lo[j] = lo[active[j]];
    box.hi[j] = hi[active[j]];
    center[j] = 0.5 * (box.lo[j] + box.hi[j]);
  }
  if (mu) {
    for (int j = 0; j < k; ++j) center[j] = (*mu)[active[j]];
    for (int j = 0; j < k; ++j) {
      if (center[j] < box.lo[j] || center[j] > box.hi[j]) {
        throw ValidationError("box.mu", "mean lies outside the box");
      }
    }
  }
  poly.S_.resize(2 * k, k);
  poly.S_.setZero();
  poly.t_.resize(2 * k);
  for (int j = 0; j < k; ++j) {
    poly.S_(j, j) = 1.0;
    poly.S_(k + j, j) = -1.0;
    poly.t_[j] = box.hi[j];
    poly.t_[k + j] = -box.lo[j];
  }
  poly.mu_ = center;
  poly.second_moment_ = uniform_second_moment(center, box.hi - box.lo);
  poly.box_ = std::move(box);
  return poly;
}

UncertaintyPolytope wind_support(const Grid& grid) {
  const int k = grid.num_wind();
  Eigen::VectorXd lo(k), hi(k);
  for (int w = 0; w < k; ++w) {
    lo[w] = grid.wind[w].xi_min;
    hi[w] = grid.wind[w].xi_max;
  }
  return reduced_box_support(lo, hi);
}

UncertaintyPolytope proportional_wind_support(const Grid& grid, double rho) {
  if (!(rho >= 0.0)) throw ValidationError("rho", "must be >= 0");
  const int k = grid.num_wind();
  Eigen::VectorXd hi(k);
  for (int w = 0; w < k; ++w) hi[w] = rho * grid.wind[w].nominal;
  return reduced_box_support(-hi, hi, Eigen::VectorXd::Zero(k));
}

double support_max(const UncertaintyPolytope& poly, const Eigen::VectorXd& a) {
  return polytope_max(poly.S(), poly.t(), a);
}

std::vector<Eigen::VectorXd> sample(const UncertaintyPolytope& poly, int count,
                                    std::uint64_t seed) {
  if (!poly.box()) {
    throw UnsupportedSupportError("sampling needs a box support");
  }
  const BoxBounds& box = *poly.box();
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(std::max(count, 0));
  Eigen::VectorXd reduced(poly.dim());
  for (int s = 0; s < count; ++s) {
    for (int j = 0; j < poly.dim(); ++j) {
      reduced[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * rng.uniform01();
    }
    out.push_back(poly.to_full(reduced));
  }
  return out;
}

std::vector<Eigen::VectorXd> vertices(const UncertaintyPolytope& poly) {
  if (!poly.box()) {
    throw UnsupportedSupportError("vertex enumeration needs a box support");
  }
  const int k = poly.dim();
  if (k > 20) {
    throw DimensionTooLargeError("2^" + std::to_string(k) +
                                 " vertices exceed the 2^20 guard");
  }
  const BoxBounds& box = *poly.box();
  std::vector<Eigen::VectorXd> out;
  out.reserve(std::size_t{1} << k);
  Eigen::VectorXd v(k);
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    for (int j = 0; j < k; ++j) {
      const bool high = (mask >> (k - 1 - j)) & 1u;
      v[j] = high ? box.hi[j] : box.lo[j];
    }
    out.push_back(poly.to_full(v));
  }
  return out;
}

void write_scenarios_csv(const std::string& path,
                         const std::vector<Eigen::VectorXd>& scenarios) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw IoError("cannot write '" + path + "'");
  const int k = scenarios.empty() ? 0 : static_cast<int>(scenarios[0].size());
  for (int j = 0; j < k; ++j) std::fprintf(f, "%sxi_%d", j ? "," : "", j + 1);
  std::fputc('\n', f);
  for (const auto& s : scenarios) {
    for (int j = 0; j < s.size(); ++j) {
      std::fprintf(f, "%s%.17g", j ? "," : "", s[j]);
    }
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw IoError("cannot write '" + path + "'");
}

std::vector<Eigen::VectorXd> read_scenarios_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto columns = static_cast<int>(
      line.empty() ? 0 : std::count(line.begin(), line.end(), ',') + 1);
  std::vector<Eigen::VectorXd> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(row),
                              "not a number: '" + cell + "'");
      }
    }
    if (static_cast<int>(vals.size()) != columns) {
      throw ValidationError(path + ":" + std::to_string(row),
                            "expected " + std::to_string(columns) + " columns");
    }
    out.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), columns));
  }
  return out;
}

}  // namespace ots
