#include "ots/report.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ots/errors.hpp"

namespace ots {
namespace {

constexpr const char* kEol = "\r\n";

template <class T, class F>
std::string opt(const std::optional<T>& v, F fmt) {
  return v ? fmt(*v) : std::string();
}

std::string status_name(SolveStatus s) {
  std::string out = to_string(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  // Avoid a signed zero depending on rounding noise.
  if (std::string(buf) == "-0.000000000") return "0.000000000";
  return buf;
}

std::string join_lines(std::span<const int> line_numbers) {
  std::string out;
  for (std::size_t k = 0; k < line_numbers.size(); ++k) {
    if (k) out += ';';
    out += std::to_string(line_numbers[k]);
  }
  return out;
}

std::string table_csv(const EvaluationTable& table) {
  std::string out =
      "method,L_o,K,S,objective,out_of_sample_cost,infeasible_scenario_count,"
      "bound_gap_percent,n_rows,n_vars,open_lines,status";
  out += kEol;
  auto num = [](double v) { return csv_number(v); };
  auto integer = [](long long v) { return std::to_string(v); };
  for (const auto& r : table.rows) {
    out += csv_field(r.method) + ',' + std::to_string(r.max_open) + ',' +
           std::to_string(r.K) + ',' + opt(r.samples, integer) + ',' +
           csv_number(r.objective) + ',' + opt(r.out_of_sample_cost, num) + ',' +
           opt(r.infeasible_scenario_count, integer) + ',' +
           opt(r.bound_gap_percent, num) + ',' + std::to_string(r.n_rows) + ',' +
           std::to_string(r.n_vars) + ',' + csv_field(join_lines(r.open_lines)) + ',' +
           csv_field(r.status) + kEol;
  }
  return out;
}

std::string timing_csv(const EvaluationTable& table) {
  std::string out = "method,L_o,K,S,wall_seconds,nodes,iterations";
  out += kEol;
  for (const auto& r : table.rows) {
    out += csv_field(r.method) + ',' + std::to_string(r.max_open) + ',' +
           std::to_string(r.K) + ',' + (r.samples ? std::to_string(*r.samples) : "") +
           ',' + csv_number(r.wall_seconds) + ',' + std::to_string(r.nodes) + ',' +
           std::to_string(r.iterations) + kEol;
  }
  return out;
}

std::string solve_csv(const SolveReport& report, std::span<const int> line_numbers) {
  std::string out = "objective,open_lines,status,nodes";
  out += kEol;
  out += csv_number(report.objective) + ',' + csv_field(join_lines(line_numbers)) + ',' +
         status_name(report.status) + ',' + std::to_string(report.nodes) + kEol;
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write to " + path + " failed");
}

void write_csv_report(const EvaluationTable& table, const std::string& path) {
  write_text(path, table_csv(table));
}

void write_csv_report(const SolveReport& report, std::span<const int> line_numbers,
                      const std::string& path) {
  write_text(path, solve_csv(report, line_numbers));
}

}  // namespace ots
