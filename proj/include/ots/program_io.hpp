#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ots/program.hpp"

namespace ots {

// Fixed-format MPS names are at most 8 characters. Names that already fit
// (and contain no blanks) are kept; everything else becomes R/C plus a
// base-36 index. Throws NameCollisionError when a kept name clashes with a
// generated one or the index does not fit.
struct MpsNames {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
};
MpsNames mps_names(const MathProgram& prog);

// Minimization program as fixed-format MPS. Numbers are written in
// shortest round-trip form, so a field may run past its nominal 12 columns.
// Comment lines map mangled column names back to the originals.
std::string export_program(const MathProgram& prog);

// Reads a `name,value` CSV (header optional). Names are matched against
// the MPS names first and then the program's own names; unknown names
// throw ValidationError, missing columns default to 0.
std::vector<double> import_solution(const MathProgram& prog,
                                    std::string_view csv);

}  // namespace ots
