#pragma once

// Line-oriented `key = value` run configuration with `#` comments.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "paritysim/core.hpp"
#include "paritysim/optimizer.hpp"

namespace paritysim {

struct Settings {
  CouplingCase coupling = CouplingCase::Nonresonant;
  Backend backend = Backend::HighFinesseFirstOrder;
  double C1 = 100.0, D1 = 100.0;
  double C2 = 100.0, D2 = 100.0;
  double kappa = 1.0;
  double tau = 1e-4;
  double eta_cav1 = 1.0, eta_cav2 = 1.0;
  bool auto_detuning = true;
  double delta_cav1 = 0.0, delta_cav2 = 0.0;  // used only without auto-detuning
  double r3 = 0.0;
  double eta3 = 1.0;
  double psi = kNonresonantPsi;
  double alpha = 1.0;
  double validity_threshold = 0.1;
  double constraint_margin = 10.0;

  SweepVariable sweep_var = SweepVariable::R3;
  double sweep_from = 0.0;
  double sweep_to = 0.95;
  int sweep_steps = 96;

  int transient_steps = 500;
  int loop_delay = 1;

  double lindblad_g = 0.0, lindblad_Gamma = 1.0, lindblad_Delta = 0.0;
  double xi2 = 0.01;
  double t_end = 0.1;
  int fock_cutoff = 32;

  int trajectories = 10000;
  double horizon_factor = 1.0;
  double theta = 0.0;
  int steps_per_horizon = 1000;
  int even_partner = 0;  // homodyne compares beta^10 with beta^00 (0) or beta^11 (1)

  std::uint64_t seed = 1;

  bool operator==(const Settings&) const = default;
};

struct RunConfig {
  Settings settings;
  std::string input_path;
  std::string output_path;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RawEntry {
  std::string value;
  int line = 0;
};

using RawMap = std::map<std::string, RawEntry, std::less<>>;

inline ParseError parse_error(const RawEntry& e, const std::string& key, const std::string& msg) {
  return ParseError(e.line, key + ": " + msg);
}

inline double parse_double(const RawEntry& e, const std::string& key) {
  const std::string_view v = e.value;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw parse_error(e, key, "malformed number '" + e.value + "'");
  return out;
}

template <class Int>
inline Int parse_int(const RawEntry& e, const std::string& key) {
  const std::string_view v = e.value;
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw parse_error(e, key, "malformed integer '" + e.value + "'");
  return out;
}

inline bool parse_bool(const RawEntry& e, const std::string& key) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw parse_error(e, key, "expected true or false, got '" + e.value + "'");
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "case", "backend", "C", "D", "C1", "D1", "C2", "D2", "d_over_c", "kappa", "tau",
      "eta_cav", "eta_cav1", "eta_cav2", "auto_detuning", "delta_cav1", "delta_cav2",
      "r3", "eta3", "psi", "alpha", "alpha2", "validity_threshold", "constraint_margin",
      "sweep_var", "sweep_from", "sweep_to", "sweep_steps", "transient_steps", "loop_delay",
      "lindblad_g", "lindblad_Gamma", "lindblad_Delta", "xi2", "t_end", "fock_cutoff",
      "trajectories", "horizon_factor", "theta", "steps_per_horizon", "homodyne_pair", "seed"};
  return keys;
}

inline bool is_known_key(std::string_view k) {
  for (const auto& key : known_keys())
    if (key == k) return true;
  return false;
}

// Keys an override replaces in addition to its own.
inline std::vector<std::string> superseded_by(const std::string& key) {
  if (key == "C") return {"C1", "C2"};
  if (key == "C1" || key == "C2") return {"C"};
  if (key == "D") return {"D1", "D2", "d_over_c"};
  if (key == "D1" || key == "D2") return {"D", "d_over_c"};
  if (key == "d_over_c") return {"D", "D1", "D2"};
  if (key == "eta_cav") return {"eta_cav1", "eta_cav2"};
  if (key == "eta_cav1" || key == "eta_cav2") return {"eta_cav"};
  if (key == "alpha") return {"alpha2"};
  if (key == "alpha2") return {"alpha"};
  return {};
}

inline RawMap read_entries(std::string_view text) {
  RawMap out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (value.empty()) throw ParseError(line_no, key + ": missing value");
    if (!is_known_key(key)) throw ParseError(line_no, "unknown key '" + key + "'");
    if (out.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
    out[key] = {value, line_no};
  }
  return out;
}

inline void reject_pair(const RawMap& m, const std::string& a, const std::string& b) {
  const auto ia = m.find(a), ib = m.find(b);
  if (ia != m.end() && ib != m.end()) {
    const RawEntry& later = ia->second.line > ib->second.line ? ia->second : ib->second;
    throw ParseError(later.line, "'" + a + "' and '" + b + "' are mutually exclusive");
  }
}

}  // namespace detail

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

// Overrides (command-line flags) replace file entries and report line 0.
inline Settings parse_settings(std::string_view text, const ConfigOverrides& overrides = {}) {
  using namespace detail;
  RawMap m = read_entries(text);
  for (const auto& [key, value] : overrides) {
    if (!is_known_key(key)) throw ParseError(0, "unknown key '" + key + "'");
    for (const auto& s : superseded_by(key)) m.erase(s);
    m[key] = {value, 0};
  }
  reject_pair(m, "C", "C1");
  reject_pair(m, "C", "C2");
  reject_pair(m, "D", "D1");
  reject_pair(m, "D", "D2");
  reject_pair(m, "D", "d_over_c");
  reject_pair(m, "D1", "d_over_c");
  reject_pair(m, "D2", "d_over_c");
  reject_pair(m, "eta_cav", "eta_cav1");
  reject_pair(m, "eta_cav", "eta_cav2");
  reject_pair(m, "alpha", "alpha2");

  Settings s;
  auto has = [&](const char* k) { return m.count(k) > 0; };
  auto num = [&](const char* k) { return parse_double(m.at(k), k); };
  auto range = [&](const char* k, bool ok, const char* what) {
    if (!ok) throw parse_error(m.at(k), k, std::string("out of range, ") + what);
  };
  auto get = [&](const char* k, double& dst, auto pred, const char* what) {
    if (!has(k)) return;
    dst = num(k);
    range(k, pred(dst), what);
  };
  auto get_int = [&](const char* k, int& dst, int lo) {
    if (!has(k)) return;
    dst = parse_int<int>(m.at(k), k);
    range(k, dst >= lo, ("must be >= " + std::to_string(lo)).c_str());
  };
  const auto any = [](double) { return true; };
  const auto nonneg = [](double v) { return v >= 0.0; };
  const auto positive = [](double v) { return v > 0.0; };
  const auto unit_open = [](double v) { return v >= 0.0 && v < 1.0; };
  const auto survival = [](double v) { return v > 0.0 && v <= 1.0; };

  std::optional<CouplingCase> coupling;
  if (has("case")) {
    const auto& e = m.at("case");
    if (e.value == "resonant") coupling = CouplingCase::Resonant;
    else if (e.value == "nonresonant") coupling = CouplingCase::Nonresonant;
    else throw parse_error(e, "case", "expected resonant or nonresonant");
  }
  if (has("backend")) {
    const auto& e = m.at("backend");
    if (e.value == "exact") s.backend = Backend::ExactMirrorAlgebra;
    else if (e.value == "first_order") s.backend = Backend::HighFinesseFirstOrder;
    else if (e.value == "nonresonant_asymptotic") s.backend = Backend::NonresonantAsymptotic;
    else throw parse_error(e, "backend", "expected exact, first_order or nonresonant_asymptotic");
  }

  double C = 100.0;
  get("C", C, nonneg, "must be >= 0");
  s.C1 = s.C2 = C;
  get("C1", s.C1, nonneg, "must be >= 0");
  get("C2", s.C2, nonneg, "must be >= 0");

  const bool explicit_D = has("D") || has("D1") || has("D2");
  if (explicit_D) {
    double D = 0.0;
    get("D", D, any, "");
    s.D1 = s.D2 = D;
    get("D1", s.D1, any, "");
    get("D2", s.D2, any, "");
  }
  if (!coupling) coupling = explicit_D && s.D1 == 0.0 && s.D2 == 0.0 ? CouplingCase::Resonant
                                                                      : CouplingCase::Nonresonant;
  s.coupling = *coupling;
  if (s.coupling == CouplingCase::Resonant) {
    if (has("d_over_c")) throw parse_error(m.at("d_over_c"), "d_over_c", "resonant coupling fixes D = 0");
    if (!explicit_D) s.D1 = s.D2 = 0.0;
    for (const char* k : {"D", "D1", "D2"})
      if (has(k) && num(k) != 0.0) throw parse_error(m.at(k), k, "resonant coupling requires D = 0");
  } else if (!explicit_D) {
    double doc = 1.0;
    get("d_over_c", doc, any, "");
    s.D1 = doc * s.C1;
    s.D2 = doc * s.C2;
  }

  get("kappa", s.kappa, positive, "must be > 0");
  get("tau", s.tau, positive, "must be > 0");
  double eta_cav = 1.0;
  get("eta_cav", eta_cav, survival, "must lie in (0, 1]");
  s.eta_cav1 = s.eta_cav2 = eta_cav;
  get("eta_cav1", s.eta_cav1, survival, "must lie in (0, 1]");
  get("eta_cav2", s.eta_cav2, survival, "must lie in (0, 1]");

  if (has("auto_detuning")) s.auto_detuning = parse_bool(m.at("auto_detuning"), "auto_detuning");
  for (const char* k : {"delta_cav1", "delta_cav2"}) {
    if (!has(k)) continue;
    if (s.auto_detuning) throw parse_error(m.at(k), k, "requires auto_detuning = false");
  }
  get("delta_cav1", s.delta_cav1, any, "");
  get("delta_cav2", s.delta_cav2, any, "");

  get("r3", s.r3, unit_open, "must lie in [0, 1)");
  get("eta3", s.eta3, survival, "must lie in (0, 1]");
  s.psi = s.coupling == CouplingCase::Resonant ? kResonantPsi : kNonresonantPsi;
  get("psi", s.psi, any, "");
  get("alpha", s.alpha, any, "");
  if (has("alpha2")) {
    double a2 = 0.0;
    get("alpha2", a2, nonneg, "must be >= 0");
    s.alpha = std::sqrt(a2);
  }
  get("validity_threshold", s.validity_threshold, [](double v) { return v > 0.0 && v < 1.0; },
      "must lie in (0, 1)");
  get("constraint_margin", s.constraint_margin, [](double v) { return v >= 1.0; }, "must be >= 1");

  if (has("sweep_var")) {
    const auto& e = m.at("sweep_var");
    if (e.value == "r3") s.sweep_var = SweepVariable::R3;
    else if (e.value == "d_over_c") s.sweep_var = SweepVariable::DOverC;
    else if (e.value == "C") s.sweep_var = SweepVariable::C;
    else if (e.value == "eta3") s.sweep_var = SweepVariable::Eta3;
    else throw parse_error(e, "sweep_var", "expected r3, d_over_c, C or eta3");
  }
  get("sweep_from", s.sweep_from, any, "");
  get("sweep_to", s.sweep_to, any, "");
  get_int("sweep_steps", s.sweep_steps, 2);
  if (s.sweep_var == SweepVariable::R3) {
    if (has("sweep_from")) range("sweep_from", unit_open(s.sweep_from), "r3 must lie in [0, 1)");
    if (has("sweep_to")) range("sweep_to", unit_open(s.sweep_to), "r3 must lie in [0, 1)");
  }
  if (!(s.sweep_from < s.sweep_to)) {
    const char* k = has("sweep_to") ? "sweep_to" : (has("sweep_from") ? "sweep_from" : nullptr);
    if (k) throw parse_error(m.at(k), k, "sweep range must satisfy sweep_from < sweep_to");
    throw ParseError(0, "sweep range must satisfy sweep_from < sweep_to");
  }

  get_int("transient_steps", s.transient_steps, 1);
  get_int("loop_delay", s.loop_delay, 1);

  // Lindblad constants default to cavity 1 in units of Gamma1 = 1.
  s.lindblad_g = std::sqrt(0.5 * s.C1 * s.kappa);
  s.lindblad_Gamma = 1.0;
  s.lindblad_Delta = 0.5 * s.D1;
  get("lindblad_g", s.lindblad_g, nonneg, "must be >= 0");
  get("lindblad_Gamma", s.lindblad_Gamma, positive, "must be > 0");
  get("lindblad_Delta", s.lindblad_Delta, any, "");
  get("xi2", s.xi2, nonneg, "must be >= 0");
  get("t_end", s.t_end, nonneg, "must be >= 0");
  get_int("fock_cutoff", s.fock_cutoff, 4);

  get_int("trajectories", s.trajectories, 1000);
  get("horizon_factor", s.horizon_factor, positive, "must be > 0");
  get("theta", s.theta, any, "");
  get_int("steps_per_horizon", s.steps_per_horizon, 1);
  if (has("homodyne_pair")) {
    const auto& e = m.at("homodyne_pair");
    if (e.value == "00") s.even_partner = 0;
    else if (e.value == "11") s.even_partner = 1;
    else throw parse_error(e, "homodyne_pair", "expected 00 or 11");
  }
  if (has("seed")) s.seed = parse_int<std::uint64_t>(m.at("seed"), "seed");
  return s;
}

inline SystemConfig build_system(const Settings& s) {
  try {
    SystemConfig cfg;
    cfg.cavity1 = CavityQubitParams::from_cooperativity(s.C1, s.D1, s.kappa, s.tau, s.eta_cav1);
    cfg.cavity2 = CavityQubitParams::from_cooperativity(s.C2, s.D2, s.kappa, s.tau, s.eta_cav2);
    if (!s.auto_detuning) {
      cfg.cavity1 = cfg.cavity1.with_cavity_detuning(s.delta_cav1);
      cfg.cavity2 = cfg.cavity2.with_cavity_detuning(s.delta_cav2);
    }
    cfg.loop = LoopParams::make(s.r3, s.eta3, s.psi, s.alpha);
    cfg.backend = s.backend;
    cfg.validity_threshold = s.validity_threshold;
    cfg.constraint_margin = s.constraint_margin;
    cfg.validate();
    return cfg;
  } catch (const ParameterError& e) {
    throw ParseError(0, e.what());
  }
}

// Parses and checks that the settings describe a valid system.
inline RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {}) {
  RunConfig rc;
  rc.settings = parse_settings(text, overrides);
  static_cast<void>(build_system(rc.settings));
  return rc;
}

namespace detail {

inline std::string exact(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  static_cast<void>(ec);
  return std::string(buf, ptr);
}

}  // namespace detail

// Every setting in resolved form; parse_settings(dump_settings(s)) == s.
inline std::string dump_settings(const Settings& s) {
  using detail::exact;
  std::ostringstream o;
  const char* backend = s.backend == Backend::ExactMirrorAlgebra      ? "exact"
                        : s.backend == Backend::NonresonantAsymptotic ? "nonresonant_asymptotic"
                                                                      : "first_order";
  o << "case = " << to_string(s.coupling) << "\n"
    << "backend = " << backend << "\n"
    << "C1 = " << exact(s.C1) << "\nD1 = " << exact(s.D1) << "\n"
    << "C2 = " << exact(s.C2) << "\nD2 = " << exact(s.D2) << "\n"
    << "kappa = " << exact(s.kappa) << "\ntau = " << exact(s.tau) << "\n"
    << "eta_cav1 = " << exact(s.eta_cav1) << "\neta_cav2 = " << exact(s.eta_cav2) << "\n"
    << "auto_detuning = " << (s.auto_detuning ? "true" : "false") << "\n";
  if (!s.auto_detuning)
    o << "delta_cav1 = " << exact(s.delta_cav1) << "\ndelta_cav2 = " << exact(s.delta_cav2) << "\n";
  o << "r3 = " << exact(s.r3) << "\neta3 = " << exact(s.eta3) << "\n"
    << "psi = " << exact(s.psi) << "\nalpha = " << exact(s.alpha) << "\n"
    << "validity_threshold = " << exact(s.validity_threshold) << "\n"
    << "constraint_margin = " << exact(s.constraint_margin) << "\n"
    << "sweep_var = " << to_string(s.sweep_var) << "\n"
    << "sweep_from = " << exact(s.sweep_from) << "\nsweep_to = " << exact(s.sweep_to) << "\n"
    << "sweep_steps = " << s.sweep_steps << "\n"
    << "transient_steps = " << s.transient_steps << "\nloop_delay = " << s.loop_delay << "\n"
    << "lindblad_g = " << exact(s.lindblad_g) << "\nlindblad_Gamma = " << exact(s.lindblad_Gamma) << "\n"
    << "lindblad_Delta = " << exact(s.lindblad_Delta) << "\n"
    << "xi2 = " << exact(s.xi2) << "\nt_end = " << exact(s.t_end) << "\n"
    << "fock_cutoff = " << s.fock_cutoff << "\n"
    << "trajectories = " << s.trajectories << "\nhorizon_factor = " << exact(s.horizon_factor) << "\n"
    << "theta = " << exact(s.theta) << "\nsteps_per_horizon = " << s.steps_per_horizon << "\n"
    << "homodyne_pair = " << (s.even_partner == 0 ? "00" : "11") << "\n"
    << "seed = " << s.seed << "\n";
  return o.str();
}

}  // namespace paritysim
