#pragma once
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "model.hpp"
#include "propagator.hpp"
#include "wkb.hpp"

namespace pol {

using json = nlohmann::json;

inline constexpr double kSpeedOfLight = 2.99792458e8;  // um / us

enum class ScenarioKind { dispersion, wkb_map, decompose, evolve, potential_profile };

inline ScenarioKind parse_kind(const std::string& s) {
  if (s == "dispersion") return ScenarioKind::dispersion;
  if (s == "wkb_map") return ScenarioKind::wkb_map;
  if (s == "decompose") return ScenarioKind::decompose;
  if (s == "evolve") return ScenarioKind::evolve;
  if (s == "potential_profile") return ScenarioKind::potential_profile;
  throw ConfigError("unknown scenario kind '" + s + "'");
}

inline const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::dispersion: return "dispersion";
    case ScenarioKind::wkb_map: return "wkb_map";
    case ScenarioKind::decompose: return "decompose";
    case ScenarioKind::evolve: return "evolve";
    case ScenarioKind::potential_profile: return "potential_profile";
  }
  return "";
}

// Subcommand that runs each kind.
inline const char* subcommand_of(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::wkb_map: return "wkb";
    case ScenarioKind::potential_profile: return "potential";
    default: return kind_name(k);
  }
}

// Medium parameters as entered, either dimensionless groups or tagged physical values.
struct ParamsInput {
  bool groups = true;
  double fom = 0, omega_over_g = 0, omega_over_delta = 0, gamma_over_delta = 0, gamma_r_over_delta = 0;
  PolaritonParams physical;  // rad/us, um, us
  double rb_um = 1;          // r_b(0) in um
  double zeta = 1;
};

struct EvolveInput {
  int branch = 1;
  double omega_center_bar = 0;
  double sigma_factor = 1;  // sigma in units of Omega^2 / 2 Delta
  int nodes = 64;
  double half_window = 3.5;
  double length = 14;       // r_b
  int resolution = 32;      // cells per r_b
  double cutoff = 3;        // r_b; 0 keeps the full band
  double absorb_width = 0.5;
  double r_center = 0.6;    // fraction of L
  double t_final = 0;
  std::string t_final_unit = "delta_over_omega2";  // or L_over_vg, inverse_delta
  double v_cap_factor = 1e4;                       // V(0) cap in units of 2 Omega^2 / Delta
  std::vector<double> snapshots{0.25, 0.5, 1.0};   // fractions of t_final
  int track_points = 40;
  double transient = 0.1;
  std::vector<double> fit_window{0.1, 1.0};
  double peak_window = 1.25;  // r_b
  int snapshot_stride = 1;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::dispersion;
  ParamsInput params;
  double epsilon = 1e-8;
  std::vector<int> branches{1, 2, 3, 4};
  std::vector<double> k_bar;
  double omega_bar = 0;
  int cells = 50;
  double window = 1.0;
  double r_max = 2.0;
  int points = 401;
  std::optional<int> state_branch;
  EvolveInput evolve;
  std::string snapshot_format = "csv";
};

namespace detail {

inline double number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(std::string("'") + key + "' must be finite");
  return x;
}

inline double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

inline int integer_or(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  return j.at(key).get<int>();
}

inline std::vector<double> number_list(const json& j, const char* key) {
  const auto& v = j.at(key);
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(std::string("'") + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
  } else if (v.is_object()) {
    const double a = number(v, "from"), b = number(v, "to");
    const int n = integer_or(v, "count", 0);
    if (n < 2) throw ConfigError(std::string("'") + key + "' range needs count >= 2");
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  } else {
    throw ConfigError(std::string("'") + key + "' must be a list or a {from, to, count} range");
  }
  if (out.empty()) throw ConfigError(std::string("'") + key + "' is empty");
  return out;
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

// Value in rad/us for a frequency tagged MHz_2pi (nu in MHz) or rad_per_us.
inline double frequency(double v, const std::string& unit) {
  if (unit == "MHz_2pi") return 2 * std::numbers::pi * v;
  if (unit == "rad_per_us") return v;
  throw ConfigError("unknown frequency unit '" + unit + "'");
}

inline double length(double v, const std::string& unit) {
  if (unit == "um") return v;
  if (unit == "m") return v * 1e6;
  throw ConfigError("unknown length unit '" + unit + "'");
}

inline ParamsInput parse_params(const json& j) {
  if (!j.is_object()) throw ConfigError("'params' must be an object");
  ParamsInput in;
  const std::string mode = j.value("mode", "groups");
  if (mode == "groups") {
    check_keys(j, {"mode", "fom", "omega_over_g", "omega_over_delta", "gamma_over_delta", "gamma_r_over_delta", "r_b"},
               "params");
    in.groups = true;
    in.fom = number(j, "fom");
    in.omega_over_g = number(j, "omega_over_g");
    in.omega_over_delta = number(j, "omega_over_delta");
    in.gamma_over_delta = number_or(j, "gamma_over_delta", 0);
    in.gamma_r_over_delta = number_or(j, "gamma_r_over_delta", 0);
    in.rb_um = j.contains("r_b") ? length(number(j.at("r_b"), "value"), j.at("r_b").value("unit", "um")) : 1.0;
  } else if (mode == "physical") {
    check_keys(j, {"mode", "units", "g", "omega_c", "delta", "gamma", "gamma_r", "r_b", "zeta"}, "params");
    const json units = j.value("units", json::object());
    const std::string fu = units.value("frequency", "MHz_2pi"), lu = units.value("length", "um");
    in.groups = false;
    auto& p = in.physical;
    p.g = frequency(number(j, "g"), fu);
    p.omega_c = frequency(number(j, "omega_c"), fu);
    p.delta = frequency(number(j, "delta"), fu);
    p.gamma = frequency(number_or(j, "gamma", 0), fu);
    p.gamma_r = frequency(number_or(j, "gamma_r", 0), fu);
    p.c = kSpeedOfLight;
    in.rb_um = length(number(j, "r_b"), lu);
    if (!(in.rb_um > 0)) throw ConfigError("r_b must be positive");
    p.c6 = std::pow(in.rb_um, 6) * p.light_shift();
    in.zeta = number_or(j, "zeta", 1);
    if (!(in.zeta >= 1)) throw ConfigError("zeta must be >= 1");
  } else {
    throw ConfigError("params.mode must be 'groups' or 'physical'");
  }
  return in;
}

inline EvolveInput parse_evolve(const json& j) {
  if (!j.is_object()) throw ConfigError("'evolution' must be an object");
  check_keys(j,
             {"branch", "omega_center_bar", "sigma_factor", "nodes", "half_window", "length", "resolution", "cutoff",
              "absorb_width", "r_center", "t_final", "t_final_unit", "v_cap_factor", "snapshots", "track_points",
              "transient", "fit_window", "peak_window", "snapshot_stride"},
             "evolution");
  EvolveInput e;
  e.branch = integer_or(j, "branch", e.branch);
  e.omega_center_bar = number_or(j, "omega_center_bar", e.omega_center_bar);
  e.sigma_factor = number_or(j, "sigma_factor", e.sigma_factor);
  e.nodes = integer_or(j, "nodes", e.nodes);
  e.half_window = number_or(j, "half_window", e.half_window);
  e.length = number_or(j, "length", e.length);
  e.resolution = integer_or(j, "resolution", e.resolution);
  e.cutoff = number_or(j, "cutoff", e.cutoff);
  e.absorb_width = number_or(j, "absorb_width", e.absorb_width);
  e.r_center = number_or(j, "r_center", e.r_center);
  e.t_final = number(j, "t_final");
  e.t_final_unit = j.value("t_final_unit", e.t_final_unit);
  e.v_cap_factor = number_or(j, "v_cap_factor", e.v_cap_factor);
  if (j.contains("snapshots")) e.snapshots = number_list(j, "snapshots");
  e.track_points = integer_or(j, "track_points", e.track_points);
  e.transient = number_or(j, "transient", e.transient);
  if (j.contains("fit_window")) e.fit_window = number_list(j, "fit_window");
  e.peak_window = number_or(j, "peak_window", e.peak_window);
  e.snapshot_stride = integer_or(j, "snapshot_stride", e.snapshot_stride);

  if (e.branch < 1) throw ConfigError("evolution.branch must be >= 1");
  if (!(e.sigma_factor > 0)) throw ConfigError("evolution.sigma_factor must be positive");
  if (!(e.length > 2)) throw ConfigError("evolution.length must exceed 2 r_b");
  if (e.resolution < 4) throw ConfigError("evolution.resolution must be >= 4");
  if (e.cutoff < 0 || e.absorb_width < 0) throw ConfigError("cutoff and absorb_width must be non-negative");
  if (!(e.r_center > 0 && e.r_center < 1)) throw ConfigError("evolution.r_center must lie in (0, 1)");
  if (!(e.t_final > 0)) throw ConfigError("evolution.t_final must be positive");
  if (e.t_final_unit != "delta_over_omega2" && e.t_final_unit != "L_over_vg" && e.t_final_unit != "inverse_delta")
    throw ConfigError("evolution.t_final_unit must be delta_over_omega2, L_over_vg or inverse_delta");
  if (!(e.v_cap_factor > 0)) throw ConfigError("evolution.v_cap_factor must be positive");
  for (double s : e.snapshots)
    if (!(s > 0 && s <= 1)) throw ConfigError("snapshot fractions must lie in (0, 1]");
  if (e.track_points < 3) throw ConfigError("evolution.track_points must be >= 3");
  if (!(e.transient >= 0 && e.transient < 1)) throw ConfigError("evolution.transient must lie in [0, 1)");
  if (e.fit_window.size() != 2 || !(e.fit_window[0] >= 0 && e.fit_window[1] <= 1 && e.fit_window[0] < e.fit_window[1]))
    throw ConfigError("evolution.fit_window must be [a, b] with 0 <= a < b <= 1");
  if (!(e.peak_window > 0)) throw ConfigError("evolution.peak_window must be positive");
  if (e.snapshot_stride < 1) throw ConfigError("evolution.snapshot_stride must be >= 1");
  return e;
}

}  // namespace detail

// Full validation happens here, before any output is written.
inline ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::check_keys(j,
                     {"kind", "params", "epsilon", "branches", "k_bar", "omega_bar", "cells", "window", "r_max",
                      "points", "state_branch", "evolution", "snapshot_format", "description"},
                     "config");
  ScenarioConfig c;
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("missing 'kind'");
  c.kind = parse_kind(j.at("kind").get<std::string>());
  if (!j.contains("params")) throw ConfigError("missing 'params'");
  c.params = detail::parse_params(j.at("params"));
  c.epsilon = detail::number_or(j, "epsilon", c.epsilon);
  if (!(c.epsilon > 0 && c.epsilon < 1e-2)) throw ConfigError("epsilon must lie in (0, 1e-2)");
  if (j.contains("branches")) {
    c.branches.clear();
    for (double b : detail::number_list(j, "branches")) {
      if (b < 1 || b != std::floor(b)) throw ConfigError("branches must be integers >= 1");
      c.branches.push_back(static_cast<int>(b));
    }
  }
  if (j.contains("k_bar")) c.k_bar = detail::number_list(j, "k_bar");
  for (double k : c.k_bar)
    if (!(k < 1)) throw ConfigError("k_bar values must be < 1");
  c.omega_bar = detail::number_or(j, "omega_bar", c.omega_bar);
  c.cells = detail::integer_or(j, "cells", c.cells);
  c.window = detail::number_or(j, "window", c.window);
  c.r_max = detail::number_or(j, "r_max", c.r_max);
  c.points = detail::integer_or(j, "points", c.points);
  if (j.contains("state_branch")) c.state_branch = detail::integer_or(j, "state_branch", 1);
  c.snapshot_format = j.value("snapshot_format", c.snapshot_format);
  if (c.snapshot_format != "csv" && c.snapshot_format != "json.gz")
    throw ConfigError("snapshot_format must be csv or json.gz");

  switch (c.kind) {
    case ScenarioKind::dispersion:
    case ScenarioKind::wkb_map:
    case ScenarioKind::decompose:
      if (c.k_bar.empty()) throw ConfigError(std::string(kind_name(c.kind)) + " needs 'k_bar'");
      break;
    case ScenarioKind::potential_profile:
      if (c.k_bar.size() != 1) throw ConfigError("potential_profile needs a single 'k_bar'");
      break;
    case ScenarioKind::evolve:
      if (!j.contains("evolution")) throw ConfigError("evolve needs 'evolution'");
      c.evolve = detail::parse_evolve(j.at("evolution"));
      break;
  }
  if (c.cells < 4 || !(c.window > 0)) throw ConfigError("cells must be >= 4 and window positive");
  if (!(c.r_max > 0) || c.points < 2) throw ConfigError("r_max must be positive and points >= 2");
  if (c.state_branch && *c.state_branch < 1) throw ConfigError("state_branch must be >= 1");
  if (!c.params.groups && c.params.zeta != 1 && c.kind != ScenarioKind::evolve)
    throw ConfigError("zeta applies to evolve scenarios only");
  return c;
}

// Normalized parameters (Delta = 1, r_b(0) = 1) of the configured medium. A zeta scaling is
// checked against K_bar of the evolved branch at its center frequency in the unscaled medium.
inline PolaritonParams normalized_params(const ScenarioConfig& c) {
  const auto& in = c.params;
  if (in.groups)
    return params_from_groups(in.fom, in.omega_over_g, in.omega_over_delta, in.gamma_over_delta, in.gamma_r_over_delta);
  in.physical.validate();
  PolaritonParams p = in.physical;
  if (in.zeta != 1) {
    const auto& e = c.evolve;
    const double kb = p.k_bar(wkb_momentum(p, p.omega_from_bar(e.omega_center_bar), e.branch));
    p = scale_params(p, in.zeta, kb);
  }
  return params_from_groups(p.figure_of_merit(), p.omega_c / p.g, p.omega_c / p.delta, p.gamma / p.delta,
                            p.gamma_r / p.delta);
}

// Physical values (rad/us, um) reconstructed from the groups with c fixed.
inline json physical_summary(const ScenarioConfig& c) {
  const auto& in = c.params;
  PolaritonParams p = in.physical;
  if (in.groups) {
    const double og = in.omega_over_g, od = in.omega_over_delta;
    p.c = kSpeedOfLight;
    p.delta = in.fom * og * og * p.c / (od * od * in.rb_um);
    p.omega_c = od * p.delta;
    p.g = p.omega_c / og;
    p.gamma = in.gamma_over_delta * p.delta;
    p.gamma_r = in.gamma_r_over_delta * p.delta;
    p.c6 = std::pow(in.rb_um, 6) * p.light_shift();
  }
  return {{"units", {{"frequency", "rad_per_us"}, {"length", "um"}, {"time", "us"}}},
          {"g", p.g},         {"omega_c", p.omega_c}, {"delta", p.delta}, {"gamma", p.gamma},
          {"gamma_r", p.gamma_r}, {"c6", p.c6},       {"c", p.c},         {"r_b", in.rb_um},
          {"zeta", in.zeta}};
}

}  // namespace pol
