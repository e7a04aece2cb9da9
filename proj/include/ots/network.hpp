#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ots/case_io.hpp"

namespace ots {

// Index-dense network in per-unit on base_mva. Prices are per p.u. hour
// (document price times base_mva), so objectives come out in $/h.
struct Bus {
  int id = 0;  // document id
  double theta_min = 0.0;
  double theta_max = 0.0;
  double load = 0.0;
};

struct Line {
  int from = 0;
  int to = 0;
  double b = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;
  double dtheta_max = 0.0;
  bool switchable = true;
};

struct Generator {
  int bus = 0;
  double cost = 0.0;
  double reserve_cost = 0.0;
  double g_min = 0.0;
  double g_max = 0.0;
  double r_minus = 0.0;
  double r_plus = 0.0;
  bool agc = false;
};

struct WindFarm {
  int bus = 0;
  double nominal = 0.0;
  double xi_min = 0.0;
  double xi_max = 0.0;
};

struct Grid {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> gens;
  std::vector<WindFarm> wind;
  int ref = 0;
  int max_open = 0;

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_lines() const { return static_cast<int>(lines.size()); }
  int num_gens() const { return static_cast<int>(gens.size()); }
  int num_wind() const { return static_cast<int>(wind.size()); }
  // Line indices carrying a switching variable, ascending.
  std::vector<int> switchable_lines() const;
};

// Converts to per-unit and fills defaults: dtheta_max =
// min(theta_max_i - theta_min_j, theta_max_j - theta_min_i), switchable =
// true, q = r_minus = r_plus = 0, agc = false, xi bounds = 0, max_open = 0.
Grid make_grid(const CaseFile& c);

struct NetworkOperators {
  Eigen::SparseMatrix<double> A;      // N x L incidence, column e_i - e_j
  Eigen::SparseMatrix<double> K_mat;  // L x N, row b_ij (e_i - e_j)'
  Eigen::VectorXd M_diag;             // b_ij * dtheta_max_ij
  Eigen::SparseMatrix<double> F;      // N x K wind placement
};

NetworkOperators build_operators(const Grid& grid);

// Whether the buses stay connected through the lines with closed[l] true.
bool is_connected(const Grid& grid, const std::vector<bool>& closed);
bool is_connected(const Grid& grid);

}  // namespace ots
