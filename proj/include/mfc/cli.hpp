#pragma once

// Subcommand bodies of the `mfc` tool. Each returns a process exit code:
//   0 ok, 1 usage or configuration error, 2 validation violations, 3 divergence.

#include <array>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mfc/harness.hpp"
#include "mfc/oscillator.hpp"

#ifndef MFC_PRESET_DIR
#define MFC_PRESET_DIR "presets"
#endif

namespace mfc::cli {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_violations = 2, exit_divergence = 3 };

struct Options {
  std::string out_dir = "out";
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::string preset_dir = MFC_PRESET_DIR;
};

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot write '" + p.string() + "'");
  f << content;
  if (!f) throw Error(Errc::io, "write failed for '" + p.string() + "'");
}

inline std::filesystem::path prepare_out(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

inline std::string trace_text(const Trace& t) {
  std::ostringstream o;
  write_trace_csv(o, t);
  return o.str();
}

inline std::string metrics_text(const RunMetrics& m) {
  std::ostringstream o;
  write_metrics(o, m);
  return o.str();
}

inline Scenario load(const std::string& path, const Options& opt) {
  auto s = load_scenario(path);
  if (opt.seed) s.noise.seed = *opt.seed;
  return s;
}

// Prints violations; returns true when the run must stop.
inline bool report_violations(const std::string& label, const std::vector<Violation>& v, const Options& opt,
                              std::ostream& err) {
  for (const auto& x : v) err << label << ": violation " << x.code << ": " << x.message << '\n';
  if (!v.empty() && opt.force) err << label << ": --force given, running anyway\n";
  return !v.empty() && !opt.force;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const DivergenceError& e) {
    err << "divergence at step " << e.step() << ": " << e.what() << '\n';
    return exit_divergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
}

}  // namespace detail

inline int cmd_validate(const std::string& path, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto s = detail::load(path, opt);
    const auto v = validate_scenario(s);
    for (const auto& x : v) out << x.code << ": " << x.message << '\n';
    if (v.empty()) out << path << ": ok\n";
    return v.empty() ? exit_ok : exit_violations;
  });
}

inline int cmd_run(const std::string& path, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto s = detail::load(path, opt);
    if (detail::report_violations(path, validate_scenario(s), opt, err)) return int(exit_violations);
    const auto res = run_closed_loop(s, {opt.force, {}});
    const auto dir = detail::prepare_out(opt.out_dir);
    detail::write_file(dir / "trace.csv", detail::trace_text(res.trace));
    detail::write_file(dir / "metrics.txt", detail::metrics_text(res.metrics));
    out << "wrote " << (dir / "trace.csv").string() << " and " << (dir / "metrics.txt").string() << '\n';
    return int(exit_ok);
  });
}

inline std::string compare_text(const std::string& name_a, const RunMetrics& a, const std::string& name_b,
                                const RunMetrics& b) {
  using mfc::detail::format_double;
  std::ostringstream o;
  o << "# a: " << name_a << '\n' << "# b: " << name_b << '\n';
  o << "metric a b\n";
  o << "iae " << format_double(a.iae) << ' ' << format_double(b.iae) << '\n';
  o << "steady_state_error " << format_double(a.steady_state_error) << ' ' << format_double(b.steady_state_error)
    << '\n';
  o << "overshoot " << format_double(a.overshoot) << ' ' << format_double(b.overshoot) << '\n';
  o << "settling_time " << settling_text(a) << ' ' << settling_text(b) << '\n';
  o << "gamma_clamp_count " << a.gamma_clamp_count << ' ' << b.gamma_clamp_count << '\n';
  o << "alpha_final_window_mean " << format_double(a.alpha_final_window_mean) << ' '
    << format_double(b.alpha_final_window_mean) << '\n';
  o << "alpha_final_window_std " << format_double(a.alpha_final_window_std) << ' '
    << format_double(b.alpha_final_window_std) << '\n';
  o << "iae_ratio " << format_double(a.iae == b.iae ? 1.0 : a.iae / b.iae) << '\n';
  return o.str();
}

inline int cmd_compare(const std::string& path_a, const std::string& path_b, const Options& opt, std::ostream& out,
                       std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto a = detail::load(path_a, opt);
    const auto b = detail::load(path_b, opt);
    if (a.sim.h != b.sim.h || step_count(a.sim) != step_count(b.sim)) {
      err << "error: scenarios use different time grids (h " << mfc::detail::format_double(a.sim.h) << " vs "
          << mfc::detail::format_double(b.sim.h) << ", " << step_count(a.sim) << " vs " << step_count(b.sim)
          << " steps)\n";
      return int(exit_usage);
    }
    const bool stop_a = detail::report_violations(path_a, validate_scenario(a), opt, err);
    const bool stop_b = detail::report_violations(path_b, validate_scenario(b), opt, err);
    if (stop_a || stop_b) return int(exit_violations);

    auto fa = std::async(std::launch::async, [&] { return run_closed_loop(a, {opt.force, {}}); });
    auto fb = std::async(std::launch::async, [&] { return run_closed_loop(b, {opt.force, {}}); });
    std::optional<RunResult> ra, rb;
    std::exception_ptr fail;
    try {
      ra = fa.get();
    } catch (...) {
      fail = std::current_exception();
    }
    try {
      rb = fb.get();
    } catch (...) {
      if (!fail) fail = std::current_exception();
    }
    if (fail) std::rethrow_exception(fail);

    const auto dir = detail::prepare_out(opt.out_dir);
    detail::write_file(dir / "trace_a.csv", detail::trace_text(ra->trace));
    detail::write_file(dir / "trace_b.csv", detail::trace_text(rb->trace));
    detail::write_file(dir / "metrics_a.txt", detail::metrics_text(ra->metrics));
    detail::write_file(dir / "metrics_b.txt", detail::metrics_text(rb->metrics));
    const auto cmp = compare_text(a.name, ra->metrics, b.name, rb->metrics);
    detail::write_file(dir / "compare.txt", cmp);
    out << cmp;
    return int(exit_ok);
  });
}

inline EnergyDemoConfig load_energy_demo(const std::string& path) {
  auto kv = parse_key_values(read_text_file(path));
  static const std::set<std::string> keys{"scenario.name", "demo.h",  "demo.steps", "demo.m",     "demo.k",
                                          "demo.damping",  "demo.x0", "demo.v0",    "demo.method"};
  for (const auto& [k, v] : kv)
    if (!keys.count(k)) throw config_error(path + ": unknown config key '" + k + "'");
  mfc::detail::KeyReader r(std::move(kv));
  EnergyDemoConfig c;
  if (r.has("scenario.name")) r.word("scenario.name");
  c.h = r.number_or("demo.h", c.h);
  if (r.has("demo.steps")) {
    const long n = r.integer("demo.steps");
    if (n < 0) throw config_error("demo.steps must be >= 0");
    c.steps = static_cast<std::size_t>(n);
  }
  c.params.mass = r.number_or("demo.m", c.params.mass);
  c.params.stiffness = r.number_or("demo.k", c.params.stiffness);
  c.params.damping = r.number_or("demo.damping", c.params.damping);
  c.initial.x = r.number_or("demo.x0", c.initial.x);
  c.initial.v = r.number_or("demo.v0", c.initial.v);
  if (r.has("demo.method")) c.methods = parse_methods(r.word("demo.method"));
  return c;
}

inline int cmd_energy_demo(const EnergyDemoConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    check_oscillator(cfg.params);
    if (!(cfg.h > 0.0)) throw config_error("--h must be > 0");
    std::ostringstream csv;
    write_energy_csv(csv, cfg);
    const auto dir = detail::prepare_out(opt.out_dir);
    detail::write_file(dir / "energy.csv", csv.str());
    out << "wrote " << (dir / "energy.csv").string() << '\n';
    return int(exit_ok);
  });
}

struct Preset {
  std::string_view id;
  std::string_view file_a;
  std::string_view file_b;  // empty: single run
};

inline constexpr std::array<Preset, 8> presets{{
    {"lti-pid", "lti-pid.scn", ""},
    {"lti-ipi", "lti-ipi.scn", ""},
    {"lti-ageing", "lti-ageing-ipi.scn", "lti-ageing-pid.scn"},
    {"alpha-ramp", "alpha-const.scn", "alpha-ramp.scn"},
    {"buck-ipi", "buck-ipi.scn", ""},
    {"buck-ipis", "buck-ipis.scn", ""},
    {"buck-ipis-load", "buck-ipis-load.scn", "buck-ipis-load-a10.scn"},
    {"energy-demo", "energy-demo.scn", ""},
}};

inline const Preset* find_preset(std::string_view id) {
  for (const auto& p : presets)
    if (p.id == id) return &p;
  return nullptr;
}

inline int cmd_preset(const std::string& id, const Options& opt, std::ostream& out, std::ostream& err) {
  const Preset* p = find_preset(id);
  if (!p) {
    err << "error: unknown preset '" << id << "'; valid presets:";
    for (const auto& x : presets) err << ' ' << x.id;
    err << '\n';
    return exit_usage;
  }
  const std::filesystem::path dir(opt.preset_dir);
  const std::string a = (dir / std::string(p->file_a)).string();
  if (p->id == "energy-demo") {
    return detail::guarded(err, [&] { return cmd_energy_demo(load_energy_demo(a), opt, out, err); });
  }
  if (p->file_b.empty()) return cmd_run(a, opt, out, err);
  return cmd_compare(a, (dir / std::string(p->file_b)).string(), opt, out, err);
}

}  // namespace mfc::cli
