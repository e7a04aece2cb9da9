#include "ots/case_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ots/errors.hpp"

namespace ots {

namespace {

using nlohmann::json;

json parse_strict(std::string_view text) {
  std::vector<std::set<std::string>> seen;
  auto callback = [&seen](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        seen.emplace_back();
        break;
      case json::parse_event_t::object_end:
        seen.pop_back();
        break;
      case json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!seen.back().insert(key).second) {
          throw SchemaError("duplicate field '" + key + "'");
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text.begin(), text.end(), callback);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed case document: ") + e.what());
  } catch (const json::out_of_range& e) {
    // Raised for number literals that overflow a double.
    throw UnitsError(std::string("non-finite number: ") + e.what());
  }
}

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw SchemaError(path_ + ": expected an object");
  }

  void only(std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : obj_.items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) throw SchemaError(at(key) + ": unknown field");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const json& get(const char* key) const {
    auto it = obj_.find(key);
    if (it == obj_.end()) throw SchemaError(at(key) + ": missing field");
    return *it;
  }

  double number(const char* key) const {
    const json& v = get(key);
    if (!v.is_number()) throw SchemaError(at(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw UnitsError(at(key) + ": non-finite number");
    return d;
  }

  std::optional<double> opt_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  int integer(const char* key) const {
    const json& v = get(key);
    if (!v.is_number_integer()) {
      throw SchemaError(at(key) + ": expected an integer");
    }
    return v.get<int>();
  }

  std::optional<int> opt_integer(const char* key) const {
    if (!has(key)) return std::nullopt;
    return integer(key);
  }

  std::optional<bool> opt_flag(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = get(key);
    if (!v.is_boolean()) throw SchemaError(at(key) + ": expected true/false");
    return v.get<bool>();
  }

  std::optional<std::string> opt_text(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = get(key);
    if (!v.is_string()) throw SchemaError(at(key) + ": expected a string");
    return v.get<std::string>();
  }

  const json& array(const char* key) const {
    const json& v = get(key);
    if (!v.is_array()) throw SchemaError(at(key) + ": expected an array");
    return v;
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
};

std::string item(const char* list, std::size_t i) {
  return std::string(list) + "[" + std::to_string(i) + "]";
}

void validate(const CaseFile& c) {
  if (!(c.base_mva > 0.0)) throw ValidationError("base_mva", "must be positive");
  if (c.buses.empty()) throw ValidationError("buses", "at least one bus required");
  std::unordered_set<int> ids;
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const auto& b = c.buses[i];
    if (!ids.insert(b.id).second) {
      throw ValidationError(item("buses", i) + ".id",
                            "duplicate bus id " + std::to_string(b.id));
    }
    if (b.theta_min > b.theta_max) {
      throw ValidationError(item("buses", i) + ".theta_min",
                            "exceeds theta_max");
    }
  }
  auto resolve = [&](int id, const std::string& path) {
    if (!ids.count(id)) {
      throw ValidationError(path, "unknown bus id " + std::to_string(id));
    }
  };
  for (std::size_t i = 0; i < c.lines.size(); ++i) {
    const auto& l = c.lines[i];
    const std::string p = item("lines", i);
    resolve(l.from, p + ".from");
    resolve(l.to, p + ".to");
    if (l.from == l.to) throw ValidationError(p + ".to", "line is a self-loop");
    if (!(l.b > 0.0)) throw ValidationError(p + ".b", "must be positive");
    if (l.f_min > 0.0) throw ValidationError(p + ".f_min", "must be <= 0");
    if (l.f_max < 0.0) throw ValidationError(p + ".f_max", "must be >= 0");
    if (l.dtheta_max && !(*l.dtheta_max > 0.0)) {
      throw ValidationError(p + ".dtheta_max", "must be positive");
    }
  }
  for (std::size_t i = 0; i < c.gens.size(); ++i) {
    const auto& g = c.gens[i];
    const std::string p = item("gens", i);
    resolve(g.bus, p + ".bus");
    if (g.g_min > g.g_max) throw ValidationError(p + ".g_min", "exceeds g_max");
    if (g.r_minus.value_or(0.0) > 0.0) {
      throw ValidationError(p + ".r_minus", "must be <= 0");
    }
    if (g.r_plus.value_or(0.0) < 0.0) {
      throw ValidationError(p + ".r_plus", "must be >= 0");
    }
  }
  for (std::size_t i = 0; i < c.wind.size(); ++i) {
    const auto& w = c.wind[i];
    const std::string p = item("wind", i);
    resolve(w.bus, p + ".bus");
    if (w.xi_min.value_or(0.0) > 0.0) {
      throw ValidationError(p + ".xi_min", "must be <= 0");
    }
    if (w.xi_max.value_or(0.0) < 0.0) {
      throw ValidationError(p + ".xi_max", "must be >= 0");
    }
  }
  resolve(c.ref_bus, "ref_bus");
  if (c.max_open.value_or(0) < 0) {
    throw ValidationError("max_open", "must be >= 0");
  }
}

}  // namespace

CaseFile parse_case(std::string_view text) {
  const json doc = parse_strict(text);
  Reader top(doc, "");
  top.only({"name", "notes", "base_mva", "buses", "lines", "gens", "wind",
            "ref_bus", "max_open"});
  CaseFile c;
  c.name = top.opt_text("name");
  c.notes = top.opt_text("notes");
  c.base_mva = top.number("base_mva");
  c.ref_bus = top.integer("ref_bus");
  c.max_open = top.opt_integer("max_open");

  const json& buses = top.array("buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    Reader r(buses[i], item("buses", i));
    r.only({"id", "theta_min", "theta_max", "load"});
    c.buses.push_back({r.integer("id"), r.number("theta_min"),
                       r.number("theta_max"), r.number("load")});
  }
  const json& lines = top.array("lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Reader r(lines[i], item("lines", i));
    r.only({"from", "to", "b", "f_min", "f_max", "dtheta_max", "switchable"});
    LineData l;
    l.from = r.integer("from");
    l.to = r.integer("to");
    l.b = r.number("b");
    l.f_min = r.number("f_min");
    l.f_max = r.number("f_max");
    l.dtheta_max = r.opt_number("dtheta_max");
    l.switchable = r.opt_flag("switchable");
    c.lines.push_back(l);
  }
  const json& gens = top.array("gens");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    Reader r(gens[i], item("gens", i));
    r.only({"bus", "c", "q", "g_min", "g_max", "r_minus", "r_plus", "agc"});
    GenData g;
    g.bus = r.integer("bus");
    g.c = r.number("c");
    g.q = r.opt_number("q");
    g.g_min = r.number("g_min");
    g.g_max = r.number("g_max");
    g.r_minus = r.opt_number("r_minus");
    g.r_plus = r.opt_number("r_plus");
    g.agc = r.opt_flag("agc");
    c.gens.push_back(g);
  }
  if (top.has("wind")) {
    const json& wind = top.array("wind");
    for (std::size_t i = 0; i < wind.size(); ++i) {
      Reader r(wind[i], item("wind", i));
      r.only({"bus", "nominal", "xi_min", "xi_max"});
      WindData w;
      w.bus = r.integer("bus");
      w.nominal = r.number("nominal");
      w.xi_min = r.opt_number("xi_min");
      w.xi_max = r.opt_number("xi_max");
      c.wind.push_back(w);
    }
  }
  validate(c);
  return c;
}

CaseFile load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open case file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str());
}

std::string serialize_case(const CaseFile& c) {
  json doc = json::object();
  if (c.name) doc["name"] = *c.name;
  if (c.notes) doc["notes"] = *c.notes;
  doc["base_mva"] = c.base_mva;
  doc["ref_bus"] = c.ref_bus;
  if (c.max_open) doc["max_open"] = *c.max_open;
  json buses = json::array();
  for (const auto& b : c.buses) {
    buses.push_back({{"id", b.id},
                     {"theta_min", b.theta_min},
                     {"theta_max", b.theta_max},
                     {"load", b.load}});
  }
  doc["buses"] = std::move(buses);
  json lines = json::array();
  for (const auto& l : c.lines) {
    json o = {{"from", l.from}, {"to", l.to},       {"b", l.b},
              {"f_min", l.f_min}, {"f_max", l.f_max}};
    if (l.dtheta_max) o["dtheta_max"] = *l.dtheta_max;
    if (l.switchable) o["switchable"] = *l.switchable;
    lines.push_back(std::move(o));
  }
  doc["lines"] = std::move(lines);
  json gens = json::array();
  for (const auto& g : c.gens) {
    json o = {{"bus", g.bus}, {"c", g.c}, {"g_min", g.g_min}, {"g_max", g.g_max}};
    if (g.q) o["q"] = *g.q;
    if (g.r_minus) o["r_minus"] = *g.r_minus;
    if (g.r_plus) o["r_plus"] = *g.r_plus;
    if (g.agc) o["agc"] = *g.agc;
    gens.push_back(std::move(o));
  }
  doc["gens"] = std::move(gens);
  json wind = json::array();
  for (const auto& w : c.wind) {
    json o = {{"bus", w.bus}, {"nominal", w.nominal}};
    if (w.xi_min) o["xi_min"] = *w.xi_min;
    if (w.xi_max) o["xi_max"] = *w.xi_max;
    wind.push_back(std::move(o));
  }
  doc["wind"] = std::move(wind);
  return doc.dump(2) + "\n";
}

}  // namespace ots
