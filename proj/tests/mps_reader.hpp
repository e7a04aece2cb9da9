#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Small whitespace-token MPS reader written independently of the exporter,
// used only to check what the exporter emits.
namespace ots::testing {

struct ParsedMps {
  std::vector<std::string> row_names, col_names;
  std::vector<char> row_type;
  std::vector<double> row_lo, row_up, col_lo, col_up, cost;
  std::vector<bool> integer;
  std::map<std::pair<int, int>, double> coef;  // (row, col)
  double obj_constant = 0.0;
};

inline ParsedMps read_mps(const std::string& text) {
  ParsedMps p;
  std::map<std::string, int> rows, cols;
  std::string obj;
  std::vector<double> rhs;
  std::vector<double> range;
  std::vector<bool> has_range;
  std::string section;
  bool in_int = false;
  std::istringstream in(text);
  std::string line;
  auto col_of = [&](const std::string& n) {
    auto it = cols.find(n);
    if (it != cols.end()) return it->second;
    const int j = static_cast<int>(p.col_names.size());
    cols[n] = j;
    p.col_names.push_back(n);
    p.col_lo.push_back(0.0);
    p.col_up.push_back(INFINITY);
    p.cost.push_back(0.0);
    p.integer.push_back(in_int);
    return j;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ') {
      section = tok[0];
      continue;
    }
    if (section == "ROWS") {
      if (tok[0] == "N") {
        obj = tok[1];
        continue;
      }
      rows[tok[1]] = static_cast<int>(p.row_names.size());
      p.row_names.push_back(tok[1]);
      p.row_type.push_back(tok[0][0]);
      rhs.push_back(0.0);
      range.push_back(0.0);
      has_range.push_back(false);
    } else if (section == "COLUMNS") {
      if (tok.size() >= 3 && tok[1] == "'MARKER'") {
        in_int = tok[2] == "'INTORG'";
        continue;
      }
      const int j = col_of(tok[0]);
      for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
        const double v = std::stod(tok[k + 1]);
        if (tok[k] == obj)
          p.cost[j] = v;
        else
          p.coef[{rows.at(tok[k]), j}] = v;
      }
    } else if (section == "RHS") {
      for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
        const double v = std::stod(tok[k + 1]);
        if (tok[k] == obj)
          p.obj_constant = -v;
        else
          rhs[rows.at(tok[k])] = v;
      }
    } else if (section == "RANGES") {
      for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
        const int i = rows.at(tok[k]);
        range[i] = std::stod(tok[k + 1]);
        has_range[i] = true;
      }
    } else if (section == "BOUNDS") {
      const int j = cols.at(tok[2]);
      const double v = tok.size() > 3 ? std::stod(tok[3]) : 0.0;
      if (tok[0] == "UP") p.col_up[j] = v;
      else if (tok[0] == "LO") p.col_lo[j] = v;
      else if (tok[0] == "FX") p.col_lo[j] = p.col_up[j] = v;
      else if (tok[0] == "FR") { p.col_lo[j] = -INFINITY; p.col_up[j] = INFINITY; }
      else if (tok[0] == "MI") p.col_lo[j] = -INFINITY;
      else if (tok[0] == "PL") p.col_up[j] = INFINITY;
      else throw std::runtime_error("bound type " + tok[0]);
    }
  }
  const std::size_t m = p.row_names.size();
  p.row_lo.resize(m);
  p.row_up.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = rhs[i];
    const double big = std::abs(r) >= 1e30 ? INFINITY : r;
    switch (p.row_type[i]) {
      case 'E':
        p.row_lo[i] = p.row_up[i] = r;
        if (has_range[i]) (range[i] > 0 ? p.row_up[i] : p.row_lo[i]) += range[i];
        break;
      case 'L':
        p.row_lo[i] = has_range[i] ? r - std::abs(range[i]) : -INFINITY;
        p.row_up[i] = big;
        break;
      case 'G':
        p.row_lo[i] = r;
        p.row_up[i] = has_range[i] ? r + std::abs(range[i]) : INFINITY;
        break;
      default:
        throw std::runtime_error("row type");
    }
  }
  return p;
}

}  // namespace ots::testing
