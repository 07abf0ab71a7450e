#pragma once

// Scenario: everything one closed-loop experiment needs, plus the
// `key = value` text format it is stored in.
//
//   # comment
//   plant.kind = buck
//   reference.breakpoints = [[0, 0], [0.002, 12]]
//
// Values starting with '[' or '{' are JSON; the rest are numbers, booleans or
// bare words. Unknown and repeated keys are errors.

#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfc/controllers.hpp"
#include "mfc/detail/format.hpp"
#include "mfc/error.hpp"
#include "mfc/harness/reference.hpp"
#include "mfc/plants.hpp"

namespace mfc {

enum class PlantKind { lti, buck };
enum class ControllerKind { pid, ipi, ipis };
enum class EstimatorMode { algebraic, ideal };

struct PlantConfig {
  PlantKind kind = PlantKind::lti;
  TransferFunction tf{{1.0}, {1.0, 1.0}};
  std::optional<double> ageing_time;
  std::vector<double> ageing_denominator;
  BuckParams buck;
  ParameterSchedule load = ParameterSchedule::constant(10.0);
  std::optional<double> load_max_slope;
};

struct NoiseConfig {
  std::uint64_t seed = 0;
  double amplitude = 0.0;
};

struct EstimatorConfig {
  long window_samples = 50;
  EstimatorMode mode = EstimatorMode::algebraic;
};

struct ControllerConfig {
  ControllerKind kind = ControllerKind::ipi;
  double alpha0 = 1.0;
  std::optional<std::pair<double, double>> alpha_ramp;  // alpha(t) = a + b t, i-PI only
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  std::optional<BroidaModel> broida;  // overrides kp, ki, kd for PID
  int nu = 1;
  double k_alpha = 2.0;
  int sign = 1;
  std::optional<std::pair<double, double>> gamma_band;
  std::optional<double> h_alpha;  // defaults to sim.h
  bool freeze_gamma = false;
  bool feedforward = true;
};

struct ActuatorConfig {
  double min = -1e6;
  double max = 1e6;
};

struct SimConfig {
  double h = 1e-3;
  double duration = 1.0;
  long plant_substeps = 1;
};

struct Scenario {
  std::string name = "unnamed";
  PlantConfig plant;
  NoiseConfig noise;
  EstimatorConfig estimator;
  ControllerConfig controller;
  ActuatorConfig actuator;
  ReferenceTrajectory reference;
  SimConfig sim;
};

inline const char* plant_kind_name(PlantKind k) { return k == PlantKind::lti ? "lti" : "buck"; }

inline const char* controller_kind_name(ControllerKind k) {
  switch (k) {
    case ControllerKind::pid: return "pid";
    case ControllerKind::ipi: return "ipi";
    case ControllerKind::ipis: return "ipis";
  }
  return "?";
}

inline const char* estimator_mode_name(EstimatorMode m) {
  return m == EstimatorMode::algebraic ? "algebraic" : "ideal";
}

/// Number of control steps N; the trace holds N + 1 records at t = k h.
inline std::size_t step_count(const SimConfig& s) {
  const double ratio = s.duration / s.h;
  const double r = std::round(ratio);
  if (std::abs(ratio - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::floor(ratio));
}

inline constexpr double max_sim_steps = 1e8;

/// Structural checks that make a scenario runnable. Lipschitz and band
/// conditions are reported by validate_scenario instead.
inline void check_scenario(const Scenario& s) {
  if (!(s.sim.h > 0.0) || !std::isfinite(s.sim.h)) throw config_error("sim.h must be > 0");
  if (!(s.sim.duration >= 0.0) || !std::isfinite(s.sim.duration)) throw config_error("sim.duration must be >= 0");
  if (s.sim.duration / s.sim.h > max_sim_steps)
    throw config_error("sim.duration / sim.h exceeds the 1e8 step budget");
  if (s.sim.plant_substeps < 1) throw config_error("sim.plant_substeps must be >= 1");
  if (s.noise.amplitude < 0.0 || !std::isfinite(s.noise.amplitude)) throw config_error("noise.amplitude must be >= 0");
  if (s.plant.kind == PlantKind::lti) {
    check_proper(s.plant.tf);
    if (s.plant.ageing_time) {
      if (s.plant.ageing_denominator.size() != s.plant.tf.denominator.size())
        throw config_error("plant.ageing_denominator must have the same degree as plant.denominator");
      check_proper({s.plant.tf.numerator, s.plant.ageing_denominator});
    }
  } else {
    check_buck(s.plant.buck);
    check_schedule(s.plant.load);
    for (const auto& b : s.plant.load.breakpoints)
      if (!(b.value > 0.0)) throw config_error("plant.R_schedule: resistance must be > 0");
  }
  if (s.controller.kind != ControllerKind::pid) {
    if (s.controller.alpha0 == 0.0 || !std::isfinite(s.controller.alpha0))
      throw config_error("controller.alpha0 must be finite and non-zero");
    if (s.controller.alpha_ramp && s.controller.kind != ControllerKind::ipi)
      throw config_error("controller.alpha_ramp applies to kind ipi only");
  }
  if (s.controller.kind == ControllerKind::ipis) {
    if (s.controller.nu < 1) throw config_error("controller.nu must be >= 1");
    if (s.controller.k_alpha == 0.0) throw config_error("controller.K_alpha must be non-zero");
    if (s.controller.h_alpha && !(*s.controller.h_alpha > 0.0)) throw config_error("controller.h_alpha must be > 0");
  }
  if (s.controller.sign != 1 && s.controller.sign != -1) throw config_error("controller.sign must be +1 or -1");
  realized_points(s.reference);
}

// ---------------------------------------------------------------------------
// Text format

namespace detail {

using json = nlohmann::json;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline json parse_value(const std::string& key, const std::string& raw) {
  if (raw.empty()) throw config_error("key '" + key + "' has an empty value");
  std::string text = raw;
  if (text.size() > 1 && text[0] == '+' && (std::isdigit(static_cast<unsigned char>(text[1])) || text[1] == '.'))
    text.erase(0, 1);
  const char c = text[0];
  const bool structured = c == '[' || c == '{' || c == '"';
  const bool numeric = std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
  if (structured || numeric || text == "true" || text == "false") {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      if (structured || text != raw) throw config_error("key '" + key + "': malformed value '" + raw + "'");
      if (numeric) throw config_error("key '" + key + "': malformed number '" + raw + "'");
    }
  }
  return json(text);
}

class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, json> values) : values_(std::move(values)) {}

  bool has(const std::string& k) const { return values_.count(k) > 0; }

  const json& raw(const std::string& k) {
    used_.insert(k);
    return values_.at(k);
  }

  double number(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_number()) throw config_error("key '" + k + "' must be a number");
    return v.get<double>();
  }

  double number_or(const std::string& k, double d) { return has(k) ? number(k) : d; }

  long integer(const std::string& k) {
    const auto& v = raw(k);
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long>(d);
    }
    throw config_error("key '" + k + "' must be an integer");
  }

  std::string word(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_string()) throw config_error("key '" + k + "' must be a word");
    return v.get<std::string>();
  }

  bool boolean(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_boolean()) throw config_error("key '" + k + "' must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_array() || v.empty()) throw config_error("key '" + k + "' must be a non-empty list of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw config_error("key '" + k + "' must be a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::pair<double, double> pair(const std::string& k) {
    const auto v = numbers(k);
    if (v.size() != 2) throw config_error("key '" + k + "' must hold exactly two numbers");
    return {v[0], v[1]};
  }

  std::vector<Breakpoint> breakpoints(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_array() || v.empty()) throw config_error("key '" + k + "' must be a non-empty list of [t, value] pairs");
    std::vector<Breakpoint> out;
    for (const auto& e : v) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw config_error("key '" + k + "' must be a list of [t, value] pairs");
      out.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return out;
  }

  void require_all_used() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) throw config_error("unknown config key '" + k + "'");
  }

 private:
  std::map<std::string, json> values_;
  std::set<std::string> used_;
};

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "scenario.name",       "plant.kind",         "plant.numerator",       "plant.denominator",
      "plant.ageing_time",   "plant.ageing_denominator", "plant.E",       "plant.L",
      "plant.C",             "plant.R_schedule",   "plant.R_interpolation", "plant.R_max_slope",
      "noise.seed",          "noise.amplitude",    "estimator.window_samples", "estimator.mode",
      "controller.kind",     "controller.alpha0",  "controller.alpha_ramp", "controller.Kp",
      "controller.Ki",       "controller.Kd",      "controller.nu",         "controller.K_alpha",
      "controller.sign",     "controller.gamma_band", "controller.broida",  "controller.h_alpha",
      "controller.freeze_gamma", "controller.feedforward", "actuator.min",  "actuator.max",
      "reference.kind",      "reference.breakpoints", "reference.max_slope", "sim.h",
      "sim.duration",        "sim.plant_substeps"};
  return keys;
}

}  // namespace detail

/// Splits `key = value` lines; errors name the key or line.
inline std::map<std::string, nlohmann::json> parse_key_values(const std::string& text) {
  std::map<std::string, nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw config_error("line " + std::to_string(lineno) + ": missing key");
    if (out.count(key)) throw config_error("duplicate config key '" + key + "'");
    out.emplace(key, detail::parse_value(key, value));
  }
  return out;
}

inline Scenario parse_scenario(const std::string& text) {
  auto kv = parse_key_values(text);
  for (const auto& [k, v] : kv)
    if (!detail::known_keys().count(k)) throw config_error("unknown config key '" + k + "'");
  detail::KeyReader r(std::move(kv));

  Scenario s;
  if (r.has("scenario.name")) s.name = r.word("scenario.name");

  const std::string plant = r.has("plant.kind") ? r.word("plant.kind") : "lti";
  if (plant == "lti") {
    s.plant.kind = PlantKind::lti;
    s.sim.h = 1e-3;
  } else if (plant == "buck") {
    s.plant.kind = PlantKind::buck;
    s.sim.h = 1e-6;
    s.actuator = {0.0, 1.0};
  } else {
    throw config_error("plant.kind: unknown kind '" + plant + "'");
  }
  if (r.has("plant.numerator")) s.plant.tf.numerator = r.numbers("plant.numerator");
  if (r.has("plant.denominator")) s.plant.tf.denominator = r.numbers("plant.denominator");
  if (r.has("plant.ageing_time") != r.has("plant.ageing_denominator"))
    throw config_error("plant.ageing_time and plant.ageing_denominator go together");
  if (r.has("plant.ageing_time")) {
    s.plant.ageing_time = r.number("plant.ageing_time");
    s.plant.ageing_denominator = r.numbers("plant.ageing_denominator");
  }
  s.plant.buck.source_voltage = r.number_or("plant.E", s.plant.buck.source_voltage);
  s.plant.buck.inductance = r.number_or("plant.L", s.plant.buck.inductance);
  s.plant.buck.capacitance = r.number_or("plant.C", s.plant.buck.capacitance);
  if (r.has("plant.R_schedule")) s.plant.load.breakpoints = r.breakpoints("plant.R_schedule");
  if (r.has("plant.R_interpolation")) {
    const auto w = r.word("plant.R_interpolation");
    if (w == "hold") s.plant.load.interpolation = Interpolation::hold;
    else if (w == "linear") s.plant.load.interpolation = Interpolation::linear;
    else throw config_error("plant.R_interpolation: expected hold or linear, got '" + w + "'");
  }
  if (r.has("plant.R_max_slope")) s.plant.load_max_slope = r.number("plant.R_max_slope");

  if (r.has("noise.seed")) {
    const long seed = r.integer("noise.seed");
    if (seed < 0) throw config_error("noise.seed must be >= 0");
    s.noise.seed = static_cast<std::uint64_t>(seed);
  }
  s.noise.amplitude = r.number_or("noise.amplitude", 0.0);

  if (r.has("estimator.window_samples")) s.estimator.window_samples = r.integer("estimator.window_samples");
  if (r.has("estimator.mode")) {
    const auto m = r.word("estimator.mode");
    if (m == "algebraic") s.estimator.mode = EstimatorMode::algebraic;
    else if (m == "ideal") s.estimator.mode = EstimatorMode::ideal;
    else throw config_error("estimator.mode: expected algebraic or ideal, got '" + m + "'");
  }

  auto& c = s.controller;
  const std::string kind = r.has("controller.kind") ? r.word("controller.kind") : "ipi";
  if (kind == "pid") c.kind = ControllerKind::pid;
  else if (kind == "ipi") c.kind = ControllerKind::ipi;
  else if (kind == "ipis") c.kind = ControllerKind::ipis;
  else throw config_error("controller.kind: unknown kind '" + kind + "'");
  c.alpha0 = r.number_or("controller.alpha0", c.alpha0);
  if (r.has("controller.alpha_ramp")) c.alpha_ramp = r.pair("controller.alpha_ramp");
  if (r.has("controller.broida")) {
    if (r.has("controller.Kp") || r.has("controller.Ki") || r.has("controller.Kd"))
      throw config_error("controller.broida cannot be combined with explicit Kp, Ki or Kd");
    const auto& b = r.raw("controller.broida");
    if (!b.is_object() || !b.contains("K") || !b.contains("T") || !b.contains("tau") || b.size() != 3 ||
        !b["K"].is_number() || !b["T"].is_number() || !b["tau"].is_number())
      throw config_error("controller.broida must be {\"K\": .., \"T\": .., \"tau\": ..}");
    c.broida = BroidaModel{b["K"].get<double>(), b["T"].get<double>(), b["tau"].get<double>()};
  }
  c.kp = r.number_or("controller.Kp", 0.0);
  c.ki = r.number_or("controller.Ki", 0.0);
  c.kd = r.number_or("controller.Kd", 0.0);
  if (r.has("controller.nu")) c.nu = static_cast<int>(r.integer("controller.nu"));
  c.k_alpha = r.number_or("controller.K_alpha", c.k_alpha);
  if (r.has("controller.sign")) c.sign = static_cast<int>(r.integer("controller.sign"));
  if (r.has("controller.gamma_band")) c.gamma_band = r.pair("controller.gamma_band");
  if (r.has("controller.h_alpha")) c.h_alpha = r.number("controller.h_alpha");
  if (r.has("controller.freeze_gamma")) c.freeze_gamma = r.boolean("controller.freeze_gamma");
  if (r.has("controller.feedforward")) c.feedforward = r.boolean("controller.feedforward");

  s.actuator.min = r.number_or("actuator.min", s.actuator.min);
  s.actuator.max = r.number_or("actuator.max", s.actuator.max);

  if (!r.has("reference.breakpoints")) throw config_error("missing required key 'reference.breakpoints'");
  if (!r.has("reference.max_slope")) throw config_error("missing required key 'reference.max_slope'");
  s.reference.kind = parse_reference_kind(r.has("reference.kind") ? r.word("reference.kind") : "piecewise");
  s.reference.breakpoints = r.breakpoints("reference.breakpoints");
  s.reference.max_slope = r.number("reference.max_slope");

  s.sim.h = r.number_or("sim.h", s.sim.h);
  if (!r.has("sim.duration")) throw config_error("missing required key 'sim.duration'");
  s.sim.duration = r.number("sim.duration");
  if (r.has("sim.plant_substeps")) s.sim.plant_substeps = r.integer("sim.plant_substeps");

  r.require_all_used();
  check_scenario(s);
  return s;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario(const std::string& path) {
  const auto text = read_text_file(path);
  try {
    return parse_scenario(text);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

namespace detail {

inline std::string list_text(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out + "]";
}

inline std::string points_text(const std::vector<Breakpoint>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    out += (i ? ", [" : "[") + format_double(v[i].time) + ", " + format_double(v[i].value) + "]";
  return out + "]";
}

}  // namespace detail

/// Canonical text of a scenario; parse_scenario reads it back unchanged.
inline std::string serialize_scenario(const Scenario& s) {
  using detail::format_double;
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
  kv("scenario.name", nlohmann::json(s.name).dump());
  kv("plant.kind", plant_kind_name(s.plant.kind));
  if (s.plant.kind == PlantKind::lti) {
    kv("plant.numerator", detail::list_text(s.plant.tf.numerator));
    kv("plant.denominator", detail::list_text(s.plant.tf.denominator));
    if (s.plant.ageing_time) {
      kv("plant.ageing_time", format_double(*s.plant.ageing_time));
      kv("plant.ageing_denominator", detail::list_text(s.plant.ageing_denominator));
    }
  } else {
    kv("plant.E", format_double(s.plant.buck.source_voltage));
    kv("plant.L", format_double(s.plant.buck.inductance));
    kv("plant.C", format_double(s.plant.buck.capacitance));
    kv("plant.R_schedule", detail::points_text(s.plant.load.breakpoints));
    kv("plant.R_interpolation", s.plant.load.interpolation == Interpolation::hold ? "hold" : "linear");
    if (s.plant.load_max_slope) kv("plant.R_max_slope", format_double(*s.plant.load_max_slope));
  }
  kv("noise.seed", std::to_string(s.noise.seed));
  kv("noise.amplitude", format_double(s.noise.amplitude));
  kv("estimator.window_samples", std::to_string(s.estimator.window_samples));
  kv("estimator.mode", estimator_mode_name(s.estimator.mode));

  const auto& c = s.controller;
  kv("controller.kind", controller_kind_name(c.kind));
  if (c.kind == ControllerKind::pid) {
    if (c.broida) {
      kv("controller.broida", "{\"K\": " + format_double(c.broida->gain) + ", \"T\": " +
                                  format_double(c.broida->time_constant) + ", \"tau\": " +
                                  format_double(c.broida->delay) + "}");
    } else {
      kv("controller.Kp", format_double(c.kp));
      kv("controller.Ki", format_double(c.ki));
      kv("controller.Kd", format_double(c.kd));
    }
  } else {
    kv("controller.alpha0", format_double(c.alpha0));
    if (c.alpha_ramp)
      kv("controller.alpha_ramp", detail::list_text({c.alpha_ramp->first, c.alpha_ramp->second}));
    kv("controller.Kp", format_double(c.kp));
    kv("controller.Ki", format_double(c.ki));
  }
  if (c.kind == ControllerKind::ipis) {
    kv("controller.nu", std::to_string(c.nu));
    kv("controller.K_alpha", format_double(c.k_alpha));
    kv("controller.sign", std::to_string(c.sign));
    if (c.gamma_band) kv("controller.gamma_band", detail::list_text({c.gamma_band->first, c.gamma_band->second}));
    if (c.h_alpha) kv("controller.h_alpha", format_double(*c.h_alpha));
    kv("controller.freeze_gamma", c.freeze_gamma ? "true" : "false");
    kv("controller.feedforward", c.feedforward ? "true" : "false");
  }
  kv("actuator.min", format_double(s.actuator.min));
  kv("actuator.max", format_double(s.actuator.max));
  kv("reference.kind", reference_kind_name(s.reference.kind));
  kv("reference.breakpoints", detail::points_text(s.reference.breakpoints));
  kv("reference.max_slope", format_double(s.reference.max_slope));
  kv("sim.h", format_double(s.sim.h));
  kv("sim.duration", format_double(s.sim.duration));
  kv("sim.plant_substeps", std::to_string(s.sim.plant_substeps));
  return o.str();
}

inline std::string scenario_hash(const Scenario& s) { return detail::hex64(detail::fnv1a64(serialize_scenario(s))); }

}  // namespace mfc
