#include "ots/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ots/errors.hpp"

namespace ots {

SolverConfig load_solver_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open solver config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("solver config '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("solver config must be an object");

  SolverConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    auto number = [&]() {
      if (!value.is_number()) {
        throw ValidationError("config." + key, "expected a number");
      }
      return value.get<double>();
    };
    auto flag = [&]() {
      if (!value.is_boolean()) {
        throw ValidationError("config." + key, "expected true/false");
      }
      return value.get<bool>();
    };
    if (key == "feas_tol") {
      cfg.feas_tol = number();
    } else if (key == "opt_tol") {
      cfg.opt_tol = number();
    } else if (key == "int_tol") {
      cfg.int_tol = number();
    } else if (key == "mip_gap") {
      cfg.mip_gap = number();
    } else if (key == "mip_gap_abs") {
      cfg.mip_gap_abs = number();
    } else if (key == "pivot_tol") {
      cfg.pivot_tol = number();
    } else if (key == "max_iterations") {
      cfg.max_iterations = static_cast<long long>(number());
    } else if (key == "max_nodes") {
      cfg.max_nodes = static_cast<long long>(number());
    } else if (key == "refactor_interval") {
      cfg.refactor_interval = static_cast<int>(number());
    } else if (key == "time_limit_seconds") {
      cfg.time_limit_seconds = number();
    } else if (key == "scaling") {
      cfg.scaling = flag();
    } else if (key == "cost_perturbation") {
      cfg.cost_perturbation = flag();
    } else if (key == "dual_steepest_edge") {
      cfg.dual_steepest_edge = flag();
    } else {
      throw SchemaError("unknown solver config key '" + key + "'");
    }
  }
  if (cfg.refactor_interval < 1) {
    throw ValidationError("config.refactor_interval", "must be >= 1");
  }
  return cfg;
}

SolverConfig solver_config_from_env() {
  const char* path = std::getenv("OTS_LDR_CONFIG");
  if (path == nullptr || *path == '\0') return {};
  return load_solver_config(path);
}

}  // namespace ots
