#pragma once

// Scenario configs: one JSON document describes the cross-section, the
// curvature/twist profile, the truncated tube, and the task to run.  Parsing
// reports line/column positions; validation errors name the offending field;
// serialization round-trips losslessly (parse -> serialize -> parse is the
// identity) so configs can be archived in manifests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistlab/bumps.hpp"
#include "twistlab/cross_section.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/experiment_io.hpp"
#include "twistlab/stability_thresholds.hpp"

namespace twistlab {

enum class TaskKind { ground_pair, lambda, spectrum, hardy, sweep, injectivity, constants };

inline const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::ground_pair: return "ground_pair";
    case TaskKind::lambda: return "lambda";
    case TaskKind::spectrum: return "spectrum";
    case TaskKind::hardy: return "hardy";
    case TaskKind::sweep: return "sweep";
    case TaskKind::injectivity: return "injectivity";
    case TaskKind::constants: return "constants";
  }
  return "?";
}

struct Scenario {
  std::string name;
  TaskKind task = TaskKind::ground_pair;

  ShapeSpec shape;
  double delta = 0.0;

  // profile; empty bump lists are legal (straight untwisted tube)
  bool has_profile = false;
  std::vector<Bump> kappa1, kappa2, theta_dot;
  double s_a = 0.0, s_b = 0.0;
  double profile_delta_s = 5e-3;

  bool has_tube = false;
  double L = 0.0;
  double tube_delta_s = 0.0;
  double margin = 2.0;

  int n_eigs = 4;
  std::uint64_t seed = 0x7a195eedULL;
  double hardy_s0 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> k_values;
  TwistStabilityMode mode = TwistStabilityMode::effective_twist;
  int mesh_segments = 48;
  std::string out_dir;
};

namespace detail {

using nlohmann::json;

inline ConfigError field_error(const std::string& field, const std::string& what) {
  return ConfigError(field + ": " + what);
}

inline double need_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw field_error(field, "expected a number");
  return j.get<double>();
}

inline double get_number(const json& j, const char* key, const std::string& scope,
                         double fallback = std::numeric_limits<double>::quiet_NaN()) {
  if (!j.contains(key)) {
    if (std::isnan(fallback)) throw field_error(scope + "." + key, "missing");
    return fallback;
  }
  return need_number(j.at(key), scope + "." + key);
}

inline Eigen::Vector2d get_point(const json& j, const char* key, const std::string& scope) {
  if (!j.contains(key)) return {0.0, 0.0};
  const json& p = j.at(key);
  if (!p.is_array() || p.size() != 2)
    throw field_error(scope + "." + key, "expected [x, y]");
  return {need_number(p[0], scope + "." + key), need_number(p[1], scope + "." + key)};
}

inline std::vector<Bump> parse_bumps(const json& j, const std::string& scope) {
  if (!j.is_array()) throw field_error(scope, "expected an array of bumps");
  std::vector<Bump> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string here = scope + "[" + std::to_string(i) + "]";
    const json& b = j[i];
    if (!b.is_object()) throw field_error(here, "expected an object");
    Bump bump;
    const std::string kind = b.contains("kind") ? b.at("kind").get<std::string>() : "cos2";
    if (kind == "cos2")
      bump.kind = Bump::Kind::cos2;
    else if (kind == "plateau")
      bump.kind = Bump::Kind::plateau;
    else
      throw field_error(here + ".kind", "unknown bump kind '" + kind + "'");
    bump.center = get_number(b, "center", here);
    bump.half_width = get_number(b, "half_width", here);
    bump.amplitude = get_number(b, "amplitude", here);
    bump.ramp = get_number(b, "ramp", here, bump.ramp);
    out.push_back(bump);
  }
  return out;
}

inline json bumps_json(const std::vector<Bump>& bumps) {
  json arr = json::array();
  for (const Bump& b : bumps) {
    json j;
    j["kind"] = b.kind == Bump::Kind::cos2 ? "cos2" : "plateau";
    j["center"] = b.center;
    j["half_width"] = b.half_width;
    j["amplitude"] = b.amplitude;
    j["ramp"] = b.ramp;
    arr.push_back(j);
  }
  return arr;
}

inline ShapeSpec parse_shape(const json& j) {
  const std::string scope = "cross_section";
  if (!j.is_object()) throw field_error(scope, "expected an object");
  if (!j.contains("kind")) throw field_error(scope + ".kind", "missing");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rectangle")
    return ShapeSpec::rectangle(get_number(j, "width", scope), get_number(j, "height", scope),
                                get_point(j, "center", scope));
  if (kind == "disk")
    return ShapeSpec::disk(get_number(j, "radius", scope), get_point(j, "center", scope));
  if (kind == "ellipse")
    return ShapeSpec::ellipse(get_number(j, "rx", scope), get_number(j, "ry", scope),
                              get_point(j, "center", scope));
  if (kind == "polygon") {
    if (!j.contains("vertices") || !j.at("vertices").is_array())
      throw field_error(scope + ".vertices", "missing or not an array");
    std::vector<Eigen::Vector2d> v;
    for (std::size_t i = 0; i < j.at("vertices").size(); ++i) {
      const json& p = j.at("vertices")[i];
      const std::string here = scope + ".vertices[" + std::to_string(i) + "]";
      if (!p.is_array() || p.size() != 2) throw field_error(here, "expected [x, y]");
      v.push_back({need_number(p[0], here), need_number(p[1], here)});
    }
    return ShapeSpec::polygon(std::move(v));
  }
  throw field_error(scope + ".kind", "unknown shape '" + kind + "'");
}

inline json shape_json(const ShapeSpec& s) {
  json j;
  switch (s.kind) {
    case ShapeSpec::Kind::rectangle:
      j["kind"] = "rectangle";
      j["width"] = s.width;
      j["height"] = s.height;
      break;
    case ShapeSpec::Kind::disk:
      j["kind"] = "disk";
      j["radius"] = s.radius;
      break;
    case ShapeSpec::Kind::ellipse:
      j["kind"] = "ellipse";
      j["rx"] = s.rx;
      j["ry"] = s.ry;
      break;
    case ShapeSpec::Kind::polygon: {
      j["kind"] = "polygon";
      json arr = json::array();
      for (const auto& v : s.vertices) arr.push_back(json::array({v.x(), v.y()}));
      j["vertices"] = arr;
      break;
    }
  }
  if (s.kind != ShapeSpec::Kind::polygon)
    j["center"] = json::array({s.center.x(), s.center.y()});
  return j;
}

}  // namespace detail

inline TaskKind parse_task(const std::string& s) {
  for (TaskKind t : {TaskKind::ground_pair, TaskKind::lambda, TaskKind::spectrum,
                     TaskKind::hardy, TaskKind::sweep, TaskKind::injectivity,
                     TaskKind::constants})
    if (s == task_name(t)) return t;
  throw ConfigError("task: unknown task '" + s + "'");
}

// Structural validation with field-named messages; numeric feasibility (grid
// margins, immersion) is left to the modules that consume the scenario.
inline void validate(const Scenario& sc) {
  if (sc.name.empty()) throw ConfigError("name: must not be empty");
  validate(sc.shape);
  if (!(sc.delta > 0.0)) throw ConfigError("cross_section.delta: must be positive");
  if (sc.has_profile) {
    if (!(sc.s_b > sc.s_a)) throw ConfigError("profile.interval: must be increasing");
    if (!(sc.profile_delta_s > 0.0))
      throw ConfigError("profile.delta_s: must be positive");
  }
  if (sc.has_tube) {
    if (!(sc.L > 0.0)) throw ConfigError("tube.L: must be positive");
    if (!(sc.tube_delta_s > 0.0)) throw ConfigError("tube.delta_s: must be positive");
    if (sc.margin < 2.0) throw ConfigError("tube.margin: must be at least 2");
  }
  if (sc.n_eigs < 1) throw ConfigError("solver.n_eigs: must be at least 1");
  if (sc.mesh_segments < 3) throw ConfigError("mesh.segments: must be at least 3");

  const bool needs_tube = sc.task == TaskKind::spectrum || sc.task == TaskKind::hardy ||
                          sc.task == TaskKind::sweep;
  if (needs_tube && !sc.has_tube)
    throw ConfigError(std::string("tube: required for task ") + task_name(sc.task));
  const bool needs_profile = sc.task == TaskKind::spectrum || sc.task == TaskKind::hardy ||
                             sc.task == TaskKind::sweep || sc.task == TaskKind::injectivity ||
                             sc.task == TaskKind::constants;
  if (needs_profile && !sc.has_profile)
    throw ConfigError(std::string("profile: required for task ") + task_name(sc.task));
  if (sc.task == TaskKind::hardy && !sc.kappa1.empty())
    throw ConfigError("profile.kappa1: the hardy task runs on a straight twisted tube");
  if (sc.task == TaskKind::sweep) {
    if (sc.k_values.empty()) throw ConfigError("sweep.k_values: must not be empty");
    for (std::size_t i = 0; i < sc.k_values.size(); ++i) {
      if (!(sc.k_values[i] >= 0.0))
        throw ConfigError("sweep.k_values[" + std::to_string(i) + "]: must be nonnegative");
      if (i > 0 && !(sc.k_values[i] > sc.k_values[i - 1]))
        throw ConfigError("sweep.k_values: must be strictly increasing");
    }
    if (sc.kappa1.empty()) throw ConfigError("profile.kappa1: sweep needs a bend shape");
  }
}

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("json parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  Scenario sc;
  if (!j.contains("name") || !j.at("name").is_string())
    throw ConfigError("name: missing or not a string");
  sc.name = j.at("name").get<std::string>();
  if (!j.contains("task") || !j.at("task").is_string())
    throw ConfigError("task: missing or not a string");
  sc.task = parse_task(j.at("task").get<std::string>());

  if (!j.contains("cross_section")) throw ConfigError("cross_section: missing");
  sc.shape = detail::parse_shape(j.at("cross_section"));
  sc.delta = detail::get_number(j.at("cross_section"), "delta", "cross_section");

  if (j.contains("profile")) {
    const nlohmann::json& p = j.at("profile");
    if (!p.is_object()) throw ConfigError("profile: expected an object");
    sc.has_profile = true;
    if (!p.contains("interval") || !p.at("interval").is_array() ||
        p.at("interval").size() != 2)
      throw ConfigError("profile.interval: expected [s_a, s_b]");
    sc.s_a = detail::need_number(p.at("interval")[0], "profile.interval");
    sc.s_b = detail::need_number(p.at("interval")[1], "profile.interval");
    sc.profile_delta_s = detail::get_number(p, "delta_s", "profile", sc.profile_delta_s);
    if (p.contains("kappa1")) sc.kappa1 = detail::parse_bumps(p.at("kappa1"), "profile.kappa1");
    if (p.contains("kappa2")) sc.kappa2 = detail::parse_bumps(p.at("kappa2"), "profile.kappa2");
    if (p.contains("theta_dot"))
      sc.theta_dot = detail::parse_bumps(p.at("theta_dot"), "profile.theta_dot");
  }

  if (j.contains("tube")) {
    const nlohmann::json& t = j.at("tube");
    if (!t.is_object()) throw ConfigError("tube: expected an object");
    sc.has_tube = true;
    sc.L = detail::get_number(t, "L", "tube");
    sc.tube_delta_s = detail::get_number(t, "delta_s", "tube");
    sc.margin = detail::get_number(t, "margin", "tube", sc.margin);
  }

  if (j.contains("solver")) {
    const nlohmann::json& s = j.at("solver");
    if (!s.is_object()) throw ConfigError("solver: expected an object");
    sc.n_eigs = int(detail::get_number(s, "n_eigs", "solver", double(sc.n_eigs)));
    sc.seed = std::uint64_t(detail::get_number(s, "seed", "solver", double(sc.seed)));
  }
  if (j.contains("hardy")) {
    const nlohmann::json& h = j.at("hardy");
    if (!h.is_object()) throw ConfigError("hardy: expected an object");
    if (h.contains("s0")) sc.hardy_s0 = detail::need_number(h.at("s0"), "hardy.s0");
  }
  if (j.contains("sweep")) {
    const nlohmann::json& s = j.at("sweep");
    if (!s.is_object()) throw ConfigError("sweep: expected an object");
    if (s.contains("k_values")) {
      if (!s.at("k_values").is_array()) throw ConfigError("sweep.k_values: expected an array");
      for (const auto& k : s.at("k_values"))
        sc.k_values.push_back(detail::need_number(k, "sweep.k_values"));
    }
    if (s.contains("mode")) {
      const std::string m = s.at("mode").get<std::string>();
      if (m == "effective_twist")
        sc.mode = TwistStabilityMode::effective_twist;
      else if (m == "pure_twist")
        sc.mode = TwistStabilityMode::pure_twist;
      else
        throw ConfigError("sweep.mode: unknown mode '" + m + "'");
    }
  }
  if (j.contains("mesh")) {
    const nlohmann::json& m = j.at("mesh");
    if (!m.is_object()) throw ConfigError("mesh: expected an object");
    sc.mesh_segments = int(detail::get_number(m, "segments", "mesh", double(sc.mesh_segments)));
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ConfigError("output_dir: expected a string");
    sc.out_dir = j.at("output_dir").get<std::string>();
  }

  validate(sc);
  return sc;
}

inline std::string scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["name"] = sc.name;
  j["task"] = task_name(sc.task);
  j["cross_section"] = detail::shape_json(sc.shape);
  j["cross_section"]["delta"] = sc.delta;
  if (sc.has_profile) {
    nlohmann::json p;
    p["interval"] = nlohmann::json::array({sc.s_a, sc.s_b});
    p["delta_s"] = sc.profile_delta_s;
    p["kappa1"] = detail::bumps_json(sc.kappa1);
    p["kappa2"] = detail::bumps_json(sc.kappa2);
    p["theta_dot"] = detail::bumps_json(sc.theta_dot);
    j["profile"] = p;
  }
  if (sc.has_tube) {
    nlohmann::json t;
    t["L"] = sc.L;
    t["delta_s"] = sc.tube_delta_s;
    t["margin"] = sc.margin;
    j["tube"] = t;
  }
  nlohmann::json s;
  s["n_eigs"] = sc.n_eigs;
  s["seed"] = sc.seed;
  j["solver"] = s;
  if (!std::isnan(sc.hardy_s0)) j["hardy"] = nlohmann::json{{"s0", sc.hardy_s0}};
  if (sc.task == TaskKind::sweep || sc.task == TaskKind::constants) {
    nlohmann::json sw;
    sw["k_values"] = sc.k_values;
    sw["mode"] = sc.mode == TwistStabilityMode::effective_twist ? "effective_twist"
                                                                : "pure_twist";
    j["sweep"] = sw;
  }
  j["mesh"] = nlohmann::json{{"segments", sc.mesh_segments}};
  if (!sc.out_dir.empty()) j["output_dir"] = sc.out_dir;
  return j.dump(2) + "\n";
}

inline std::string scenario_hash(const Scenario& sc) {
  return fnv1a64_hex(scenario_to_json(sc));
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace twistlab
