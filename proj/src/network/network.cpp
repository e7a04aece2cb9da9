#include "ots/network.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "ots/errors.hpp"

namespace ots {

std::vector<int> Grid::switchable_lines() const {
  std::vector<int> out;
  for (int l = 0; l < num_lines(); ++l) {
    if (lines[l].switchable) out.push_back(l);
  }
  return out;
}

Grid make_grid(const CaseFile& c) {
  Grid g;
  g.base_mva = c.base_mva;
  const double base = c.base_mva;
  std::unordered_map<int, int> index;
  for (const auto& b : c.buses) {
    index.emplace(b.id, static_cast<int>(g.buses.size()));
    g.buses.push_back({b.id, b.theta_min, b.theta_max, b.load / base});
  }
  auto bus = [&](int id) {
    auto it = index.find(id);
    if (it == index.end()) {
      throw ValidationError("bus", "unknown bus id " + std::to_string(id));
    }
    return it->second;
  };
  for (const auto& l : c.lines) {
    Line line;
    line.from = bus(l.from);
    line.to = bus(l.to);
    line.b = l.b;
    line.f_min = l.f_min / base;
    line.f_max = l.f_max / base;
    const Bus& i = g.buses[line.from];
    const Bus& j = g.buses[line.to];
    line.dtheta_max = l.dtheta_max.value_or(
        std::min(i.theta_max - j.theta_min, j.theta_max - i.theta_min));
    line.switchable = l.switchable.value_or(true);
    g.lines.push_back(line);
  }
  for (const auto& gd : c.gens) {
    Generator gen;
    gen.bus = bus(gd.bus);
    gen.cost = gd.c * base;
    gen.reserve_cost = gd.q.value_or(0.0) * base;
    gen.g_min = gd.g_min / base;
    gen.g_max = gd.g_max / base;
    gen.r_minus = gd.r_minus.value_or(0.0) / base;
    gen.r_plus = gd.r_plus.value_or(0.0) / base;
    gen.agc = gd.agc.value_or(false);
    g.gens.push_back(gen);
  }
  for (const auto& w : c.wind) {
    g.wind.push_back({bus(w.bus), w.nominal / base, w.xi_min.value_or(0.0) / base,
                      w.xi_max.value_or(0.0) / base});
  }
  g.ref = bus(c.ref_bus);
  g.max_open = c.max_open.value_or(0);
  return g;
}

NetworkOperators build_operators(const Grid& grid) {
  const int n = grid.num_buses();
  const int l = grid.num_lines();
  const int k = grid.num_wind();
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> a, kt, f;
  NetworkOperators ops;
  ops.M_diag.resize(l);
  for (int e = 0; e < l; ++e) {
    const Line& line = grid.lines[e];
    a.emplace_back(line.from, e, 1.0);
    a.emplace_back(line.to, e, -1.0);
    kt.emplace_back(e, line.from, line.b);
    kt.emplace_back(e, line.to, -line.b);
    ops.M_diag[e] = line.b * line.dtheta_max;
  }
  for (int w = 0; w < k; ++w) f.emplace_back(grid.wind[w].bus, w, 1.0);
  ops.A.resize(n, l);
  ops.A.setFromTriplets(a.begin(), a.end());
  ops.K_mat.resize(l, n);
  ops.K_mat.setFromTriplets(kt.begin(), kt.end());
  ops.F.resize(n, k);
  ops.F.setFromTriplets(f.begin(), f.end());
  return ops;
}

bool is_connected(const Grid& grid, const std::vector<bool>& closed) {
  const int n = grid.num_buses();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = n;
  for (int e = 0; e < grid.num_lines(); ++e) {
    if (!closed[e]) continue;
    const int a = find(grid.lines[e].from);
    const int b = find(grid.lines[e].to);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components <= 1;
}

bool is_connected(const Grid& grid) {
  return is_connected(grid, std::vector<bool>(grid.num_lines(), true));
}

}  // namespace ots
