#include "ots/program_io.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "ots/errors.hpp"

namespace ots {
namespace {

constexpr std::size_t kNameWidth = 8;
constexpr long long kMaxGenerated = 78364164096LL;  // 36^7
const std::unordered_set<std::string> kReserved = {"OBJ", "RHS", "RNG",
                                                   "BND", "MARKER"};

std::string generated(char prefix, long long index) {
  if (index >= kMaxGenerated)
    throw NameCollisionError("more than 36^7 names of kind '" +
                             std::string(1, prefix) + "'");
  std::string s(7, '0');
  for (int k = 6; k >= 0; --k) {
    s[k] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"[index % 36];
    index /= 36;
  }
  return prefix + s;
}

bool fits(const std::string& name) {
  return !name.empty() && name.size() <= kNameWidth &&
         name.find_first_of(" \t\r\n$*") == std::string::npos &&
         !kReserved.contains(name);
}

std::vector<std::string> mangle(const std::vector<std::string>& orig,
                                char prefix) {
  std::unordered_map<std::string, int> seen;
  for (const auto& n : orig) ++seen[n];
  std::vector<std::string> out(orig.size());
  std::unordered_set<std::string> kept;
  for (std::size_t i = 0; i < orig.size(); ++i)
    if (fits(orig[i]) && seen[orig[i]] == 1) {
      out[i] = orig[i];
      kept.insert(orig[i]);
    }
  for (std::size_t i = 0; i < orig.size(); ++i) {
    if (!out[i].empty()) continue;
    out[i] = generated(prefix, static_cast<long long>(i));
    if (kept.contains(out[i]))
      throw NameCollisionError("mangled name '" + out[i] +
                               "' collides with an existing name");
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

// Field layout of fixed MPS: type in columns 2-3, names at 5 and 15,
// number at 25.
void line(std::string& out, const char* type, const std::string& a,
          const std::string& b, const std::string& value) {
  out += ' ';
  out += pad(type, 2);
  out += ' ';
  out += pad(a, 10);
  if (value.empty()) {
    out += b;
  } else {
    out += pad(b, 10);
    out += value;
  }
  // Trailing blanks confuse some readers.
  while (!out.empty() && out.back() == ' ') out.pop_back();
  out += '\n';
}

std::vector<std::string> split_csv_line(std::string_view s) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (quoted) {
      if (ch == '"' && i + 1 < s.size() && s[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  return fields;
}

}  // namespace

MpsNames mps_names(const MathProgram& prog) {
  std::vector<std::string> rows(prog.num_rows()), cols(prog.num_vars());
  for (int i = 0; i < prog.num_rows(); ++i) rows[i] = prog.row_name(i);
  for (int j = 0; j < prog.num_vars(); ++j) cols[j] = prog.var_name(j);
  return {mangle(rows, 'R'), mangle(cols, 'C')};
}

std::string export_program(const MathProgram& prog) {
  const MpsNames names = mps_names(prog);
  const int m = prog.num_rows();
  const int n = prog.num_vars();

  // Column-wise copy of the row-major matrix.
  std::vector<std::vector<std::pair<int, double>>> colwise(n);
  for (int i = 0; i < m; ++i) {
    auto idx = prog.row_indices(i);
    auto val = prog.row_values(i);
    for (std::size_t k = 0; k < idx.size(); ++k)
      colwise[idx[k]].emplace_back(i, val[k]);
  }

  std::string out;
  out += "NAME          OTS\n";
  for (int j = 0; j < n; ++j)
    if (names.cols[j] != prog.var_name(j))
      out += "* " + names.cols[j] + " " + prog.var_name(j) + "\n";

  out += "ROWS\n";
  line(out, "N", "OBJ", "", "");
  for (int i = 0; i < m; ++i) {
    const double lo = prog.row_lower(i), up = prog.row_upper(i);
    const char* type = lo == up                ? "E"
                       : std::isinf(up) && !std::isinf(lo) ? "G"
                                                           : "L";
    line(out, type, names.rows[i], "", "");
  }

  out += "COLUMNS\n";
  bool in_int = false;
  auto toggle = [&](bool want) {
    if (want == in_int) return;
    out += "    MARKER                 'MARKER'                 ";
    out += want ? "'INTORG'\n" : "'INTEND'\n";
    in_int = want;
  };
  const auto& cost = prog.costs();
  for (int j = 0; j < n; ++j) {
    toggle(prog.var_kind(j) == VarKind::Binary);
    const std::string& cn = names.cols[j];
    // An empty column still needs one entry to be declared.
    if (cost[j] != 0.0 || colwise[j].empty())
      line(out, "", cn, "OBJ", num(cost[j]));
    for (auto [i, v] : colwise[j]) line(out, "", cn, names.rows[i], num(v));
  }
  toggle(false);

  out += "RHS\n";
  if (prog.objective_constant() != 0.0)
    line(out, "", "RHS", "OBJ", num(-prog.objective_constant()));
  for (int i = 0; i < m; ++i) {
    const double lo = prog.row_lower(i), up = prog.row_upper(i);
    double rhs;
    if (lo == up || (std::isinf(up) && !std::isinf(lo)))
      rhs = lo;
    else if (!std::isinf(up))
      rhs = up;
    else
      rhs = 1e30;  // free row
    if (rhs != 0.0) line(out, "", "RHS", names.rows[i], num(rhs));
  }

  bool ranges_header = false;
  for (int i = 0; i < m; ++i) {
    const double lo = prog.row_lower(i), up = prog.row_upper(i);
    if (lo == up || std::isinf(lo) || std::isinf(up)) continue;
    if (!ranges_header) {
      out += "RANGES\n";
      ranges_header = true;
    }
    line(out, "", "RNG", names.rows[i], num(up - lo));
  }

  out += "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    const double lo = prog.var_lower(j), up = prog.var_upper(j);
    const std::string& cn = names.cols[j];
    if (lo == up) {
      line(out, "FX", "BND", cn, num(lo));
      continue;
    }
    if (std::isinf(lo) && std::isinf(up)) {
      line(out, "FR", "BND", cn, "");
      continue;
    }
    if (std::isinf(lo))
      line(out, "MI", "BND", cn, "");
    else if (lo != 0.0 || up < 0.0 || prog.var_kind(j) == VarKind::Binary)
      line(out, "LO", "BND", cn, num(lo));
    if (!std::isinf(up)) line(out, "UP", "BND", cn, num(up));
  }
  out += "ENDATA\n";
  return out;
}

std::vector<double> import_solution(const MathProgram& prog,
                                    std::string_view csv) {
  const MpsNames names = mps_names(prog);
  std::unordered_map<std::string, int> index;
  for (int j = 0; j < prog.num_vars(); ++j) index.emplace(names.cols[j], j);
  for (int j = 0; j < prog.num_vars(); ++j) index.emplace(prog.var_name(j), j);

  std::vector<double> x(prog.num_vars(), 0.0);
  std::size_t pos = 0;
  int lineno = 0;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv.size();
    std::string_view ln = csv.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (!ln.empty() && ln.back() == '\r') ln.remove_suffix(1);
    if (ln.empty()) continue;
    auto f = split_csv_line(ln);
    const std::string where = "solution line " + std::to_string(lineno);
    if (f.size() != 2) throw ValidationError(where, "expected name,value");
    double v = 0.0;
    const char* b = f[1].data();
    const char* e = b + f[1].size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) {
      if (lineno == 1) continue;  // header
      throw ValidationError(where, "bad value '" + f[1] + "'");
    }
    auto it = index.find(f[0]);
    if (it == index.end())
      throw ValidationError(where, "unknown column '" + f[0] + "'");
    x[it->second] = v;
  }
  return x;
}

}  // namespace ots
