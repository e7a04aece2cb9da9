#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ots {

// Case document in its own units: MW for power, radians for angles,
// $/MWh for prices, per-unit for susceptance.
struct BusData {
  int id = 0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double load = 0.0;
};

struct LineData {
  int from = 0;
  int to = 0;
  double b = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;
  std::optional<double> dtheta_max;
  std::optional<bool> switchable;  // absent means switchable
};

struct GenData {
  int bus = 0;
  double c = 0.0;
  std::optional<double> q;
  double g_min = 0.0;
  double g_max = 0.0;
  std::optional<double> r_minus;
  std::optional<double> r_plus;
  std::optional<bool> agc;
};

struct WindData {
  int bus = 0;
  double nominal = 0.0;
  std::optional<double> xi_min;
  std::optional<double> xi_max;
};

struct CaseFile {
  std::optional<std::string> name;
  std::optional<std::string> notes;
  double base_mva = 100.0;
  std::vector<BusData> buses;
  std::vector<LineData> lines;
  std::vector<GenData> gens;
  std::vector<WindData> wind;
  int ref_bus = 0;
  std::optional<int> max_open;
};

// Throws SchemaError (missing, unknown, duplicate or mistyped field),
// UnitsError (non-finite number) or ValidationError (invariant violated;
// path like "lines[3].f_min").
CaseFile parse_case(std::string_view text);
CaseFile load_case(const std::string& path);

// JSON text that parse_case maps back to an identical CaseFile.
std::string serialize_case(const CaseFile& c);

}  // namespace ots
