#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ots/case_io.hpp"
#include "ots/uncertainty.hpp"

namespace ots::testing {

// Bus 1 with a generator (c=10, g_max=200 MW), bus 2 with a 100 MW load,
// one switchable line. base_mva = 100.
inline CaseFile two_bus_case() {
  CaseFile c;
  c.base_mva = 100.0;
  c.buses = {{1, -0.6, 0.6, 0.0}, {2, -0.6, 0.6, 100.0}};
  LineData l;
  l.from = 1;
  l.to = 2;
  l.b = 10.0;
  l.f_min = -150.0;
  l.f_max = 150.0;
  l.dtheta_max = 0.6;
  c.lines = {l};
  GenData g;
  g.bus = 1;
  g.c = 0.1;
  g.g_min = 0.0;
  g.g_max = 200.0;
  c.gens = {g};
  c.ref_bus = 1;
  return c;
}

struct RandomCaseOptions {
  int min_buses = 3;
  int max_buses = 8;
  int max_lines = 12;
  int wind = 0;
  double wind_width = 0.0;  // xi box half-width as a fraction of nominal
  bool reserves = false;
};

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform01() * (hi - lo + 1));
}

// Connected random grid: a random spanning tree plus parallel-free extra
// lines, two to three generators with staggered costs, loads on most buses
// and line limits tight enough that switching can pay off.
inline CaseFile random_case(Rng& rng, const RandomCaseOptions& opt) {
  CaseFile c;
  c.base_mva = 100.0;
  const int n = uniform_int(rng, opt.min_buses, opt.max_buses);
  double total_load = 0.0;
  for (int i = 0; i < n; ++i) {
    const double load = rng.uniform01() < 0.7 ? 20.0 + 60.0 * rng.uniform01() : 0.0;
    total_load += load;
    c.buses.push_back({i + 1, -0.5, 0.5, std::round(load)});
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(uniform_int(rng, 0, i - 1), i);
  const int target = std::min(opt.max_lines, n * (n - 1) / 2);
  const int extra = uniform_int(rng, 0, std::max(0, target - (n - 1)));
  for (int tries = 0; tries < 50 && static_cast<int>(edges.size()) < n - 1 + extra;
       ++tries) {
    int a = uniform_int(rng, 0, n - 1);
    int b = uniform_int(rng, 0, n - 1);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (std::find(edges.begin(), edges.end(), std::make_pair(a, b)) != edges.end()) {
      continue;
    }
    edges.emplace_back(a, b);
  }
  for (auto [a, b] : edges) {
    LineData l;
    l.from = a + 1;
    l.to = b + 1;
    l.b = 5.0 + std::round(20.0 * rng.uniform01());
    const double cap = 40.0 + std::round(80.0 * rng.uniform01());
    l.f_min = -cap;
    l.f_max = cap;
    l.dtheta_max = 1.0;
    c.lines.push_back(l);
  }
  const int gens = std::min(n, uniform_int(rng, 2, 3));
  for (int k = 0; k < gens; ++k) {
    GenData g;
    g.bus = uniform_int(rng, 1, n);
    g.c = 10.0 + std::round(40.0 * rng.uniform01());
    g.g_min = 0.0;
    g.g_max = std::round(total_load * (0.6 + 0.6 * rng.uniform01())) + 10.0;
    if (opt.reserves) {
      g.q = std::round(5.0 * rng.uniform01());
      g.r_minus = -std::round(0.5 * g.g_max);
      g.r_plus = std::round(0.5 * g.g_max);
      g.agc = true;
    }
    c.gens.push_back(g);
  }
  for (int w = 0; w < opt.wind; ++w) {
    WindData wd;
    wd.bus = uniform_int(rng, 1, n);
    wd.nominal = 10.0 + std::round(30.0 * rng.uniform01());
    wd.xi_min = -opt.wind_width * wd.nominal;
    wd.xi_max = opt.wind_width * wd.nominal;
    c.wind.push_back(wd);
  }
  c.ref_bus = 1;
  return c;
}

}  // namespace ots::testing
