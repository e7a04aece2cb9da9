// Writes random bounded LPs as MPS next to our optimum, for an external
// solver to re-solve. Usage: mps_crosscheck <dir> [count]
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "../lp_checks.hpp"
#include "ots/program_io.hpp"
#include "ots/solver.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: mps_crosscheck <dir> [count]\n";
    return 2;
  }
  const std::string dir = argv[1];
  const int count = argc > 2 ? std::stoi(argv[2]) : 20;
  std::mt19937_64 gen(2024);
  for (int t = 0; t < count; ++t) {
    const auto prog = ots::testing::random_bounded_lp(gen, 50, 80, 0.1);
    const auto rep = ots::solve_lp(prog);
    if (rep.status != ots::SolveStatus::Optimal) {
      std::cerr << "lp " << t << ": " << ots::to_string(rep.status) << "\n";
      return 3;
    }
    const std::string base = dir + "/lp" + std::to_string(t);
    std::ofstream(base + ".mps") << ots::export_program(prog);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g\n", rep.objective);
    std::ofstream(base + ".obj") << buf;
  }
  return 0;
}
