#pragma once

// Command-line front end. Every configuration key is also accepted as a
// `--key value` flag that overrides the file.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "paritysim/config.hpp"
#include "paritysim/decoherence.hpp"
#include "paritysim/homodyne.hpp"
#include "paritysim/lindblad.hpp"
#include "paritysim/optimizer.hpp"
#include "paritysim/steady_state.hpp"
#include "paritysim/transient.hpp"
#include "paritysim/validity.hpp"

namespace paritysim::cli {

enum ExitCode { kOk = 0, kFailure = 2, kSingular = 3 };

inline std::string fmt(double v, int digits = 12) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  static_cast<void>(ec);
  return std::string(buf, ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += csv_field(r[i]);
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes through a sibling temporary file and renames it into place.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigurationError("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw ConfigurationError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigurationError("cannot rename output into " + path + ": " + ec.message());
  }
}

struct Report {
  std::vector<std::pair<std::string, std::string>> items;

  void add(const std::string& k, const std::string& v) { items.emplace_back(k, v); }
  void add(const std::string& k, double v, int digits = 12) { add(k, fmt(v, digits)); }
  void add_flag(const std::string& k, bool v) { add(k, std::string(v ? "true" : "false")); }

  std::string text() const {
    std::string out;
    for (const auto& [k, v] : items) out += k + "=" + v + "\n";
    return out;
  }
  std::string csv() const {
    CsvTable t({"quantity", "value"});
    for (const auto& [k, v] : items) t.add({k, v});
    return t.str();
  }
};

struct Context {
  RunConfig config;
  std::ostream& out;
  std::ostream& err;
};

inline void emit_table(const Context& ctx, const CsvTable& t) {
  if (ctx.config.output_path.empty()) {
    ctx.out << t.str();
  } else {
    write_atomic(ctx.config.output_path, t.str());
  }
}

inline void emit_report(const Context& ctx, const Report& r) {
  ctx.out << r.text();
  if (!ctx.config.output_path.empty()) write_atomic(ctx.config.output_path, r.csv());
}

inline void push_complex(std::vector<std::string>& row, complex z) {
  row.push_back(fmt(z.real()));
  row.push_back(fmt(z.imag()));
}

inline int cmd_amplitudes(const Context& ctx) {
  const SystemConfig cfg = build_system(ctx.config.settings);
  const ConditionalAmplitudes amps = solve_loop(cfg);
  std::vector<std::string> header{"state", "beta_re", "beta_im"};
  for (int k = 1; k <= 5; ++k) {
    header.push_back("zeta" + std::to_string(k) + "_re");
    header.push_back("zeta" + std::to_string(k) + "_im");
  }
  for (const char* h : {"xi1_re", "xi1_im", "xi2_re", "xi2_im"}) header.emplace_back(h);
  CsvTable t(header);
  for (const QubitPair s : kAllPairs) {
    const StateAmplitudes& a = amps.at(s);
    std::vector<std::string> row{s.label()};
    push_complex(row, a.beta);
    for (complex z : a.zeta) push_complex(row, z);
    push_complex(row, a.xi1);
    push_complex(row, a.xi2);
    t.add(std::move(row));
  }
  emit_table(ctx, t);
  return kOk;
}

inline int cmd_rates(const Context& ctx) {
  const SystemConfig cfg = build_system(ctx.config.settings);
  const ConditionalAmplitudes amps = solve_loop(cfg);
  const DecoherenceReport d = analyze(amps, cfg);
  Report r;
  r.add("backend", to_string(cfg.backend));
  r.add("t_m", d.t_m);
  r.add("t_m00", d.t_m00);
  r.add("t_m11", d.t_m11);
  r.add("nu_odd_se_1", d.nu_odd_se_1);
  r.add("nu_odd_se_2", d.nu_odd_se_2);
  r.add("nu_even_se_1", d.nu_even_se_1);
  r.add("nu_even_se_2", d.nu_even_se_2);
  r.add("nu_odd_loss", d.nu_odd_loss);
  r.add("nu_even_loss", d.nu_even_loss);
  r.add("nu_cav_loss_odd_1", d.nu_cav_loss_odd_1);
  r.add("nu_cav_loss_odd_2", d.nu_cav_loss_odd_2);
  r.add("nu_cav_loss_even_1", d.nu_cav_loss_even_1);
  r.add("nu_cav_loss_even_2", d.nu_cav_loss_even_2);
  r.add("odd_exponent", d.odd_exponent());
  r.add("even_exponent", d.even_exponent());
  r.add_flag("even_imbalance", d.even_imbalance);
  r.add("even_imbalance_sq", d.even_imbalance_sq);
  const ValidityReport v = check_weak_driving(cfg, amps);
  r.add_flag("weak_driving_ok", v.all_pass());
  for (const auto& w : d.warnings) ctx.err << "warning: " << w << "\n";
  emit_report(ctx, r);
  return kOk;
}

inline SweepSpec sweep_spec(const Settings& s) {
  SweepSpec spec;
  spec.variable = s.sweep_var;
  spec.lo = s.sweep_from;
  spec.hi = s.sweep_to;
  spec.steps = s.sweep_steps;
  spec.coupling = s.coupling;
  spec.C = s.C1;
  spec.d_over_c = s.C1 != 0.0 ? s.D1 / s.C1 : 0.0;
  spec.r3 = s.r3;
  spec.eta3 = s.eta3;
  return spec;
}

inline int cmd_sweep(const Context& ctx) {
  const Settings& s = ctx.config.settings;
  if (s.C1 != s.C2 || s.D1 != s.D2 || s.eta_cav1 != 1.0 || s.eta_cav2 != 1.0)
    throw ConfigurationError("sweep requires identical lossless cavities");
  const SweepTable table = run_sweep(sweep_spec(s), sweep_threads());
  std::vector<std::string> header{table.variable};
  for (const char* c : SweepTable::kColumnNames) header.emplace_back(c);
  CsvTable t(header);
  for (const auto& row : table.rows) {
    std::vector<std::string> line{fmt(row.value)};
    for (double v : row.columns) line.push_back(fmt(v));
    line.push_back(row.flags);
    t.add(std::move(line));
  }
  emit_table(ctx, t);
  return kOk;
}

inline int cmd_optimize(const Context& ctx) {
  const Settings& s = ctx.config.settings;
  const SystemConfig cfg = build_system(s);
  Report r;
  r.add("case", to_string(s.coupling));
  r.add("C", s.C1);
  r.add("eta3", s.eta3);
  bool have_closed_form = false;
  if (s.coupling == CouplingCase::Resonant) {
    r.add("r3_opt", r3_opt_resonant(s.C1, s.eta3), 6);
    have_closed_form = true;
  } else {
    const double reF2 = re_F2_nonresonant(s.C1, s.D1);
    const ClosedFormOptimum opt = r3_opt_nonresonant(reF2, s.eta3);
    r.add("D", s.D1);
    r.add("re_F2", reF2);
    if (!opt.needs_numeric) {
      r.add("r3_opt", opt.r3, 6);
      have_closed_form = true;
    }
  }
  try {
    const NumericOptimum num = minimize_r3_numeric(cfg, s.constraint_margin);
    if (!have_closed_form) r.add("r3_opt", num.r3, 6);
    r.add("r3_numeric", num.r3);
    r.add("objective", num.value);
    r.add("r_max", num.r_max);
    r.add_flag("constraint_active", num.constraint_active);
    r.add_flag("unimodal", num.unimodal);
  } catch (const ConstraintError& e) {
    if (!have_closed_form) throw;
    r.add("r3_numeric", std::string("infeasible"));
    ctx.err << "constraint: " << e.what() << "\n";
  }
  emit_report(ctx, r);
  return kOk;
}

inline int cmd_transient(const Context& ctx) {
  const Settings& s = ctx.config.settings;
  const SystemConfig cfg = build_system(s);
  const auto alpha = step_input(cfg.loop.alpha, s.transient_steps);
  const TransientTrace tr = propagate_closed_loop(LoopNetwork::from_config(cfg, s.loop_delay), alpha, s.transient_steps);
  std::vector<std::string> header{"n", "t", "alpha_re", "alpha_im"};
  for (const QubitPair p : kAllPairs) {
    header.push_back("beta" + p.label() + "_re");
    header.push_back("beta" + p.label() + "_im");
  }
  CsvTable t(header);
  for (std::size_t n = 0; n < tr.size(); ++n) {
    std::vector<std::string> row{std::to_string(n), fmt(static_cast<double>(n) * tr.tau)};
    push_complex(row, tr.alpha[n]);
    for (const QubitPair p : kAllPairs) push_complex(row, tr.at(p).beta[n]);
    t.add(std::move(row));
  }
  emit_table(ctx, t);
  return kOk;
}

inline int cmd_lindblad(const Context& ctx) {
  const Settings& s = ctx.config.settings;
  lindblad::LightAtomParams p{s.lindblad_g, s.lindblad_Gamma, s.lindblad_Delta};
  lindblad::IntegratorConfig ic;
  ic.fock_cutoff = s.fock_cutoff;
  const auto rep = lindblad::compare_elimination(p, std::sqrt(s.xi2), s.t_end, ic);
  Report r;
  r.add("g", p.g);
  r.add("Gamma", p.Gamma);
  r.add("Delta", p.Delta);
  r.add("xi2", s.xi2);
  r.add("t_end", s.t_end);
  r.add("condition_ratio", rep.condition_ratio);
  r.add("max_field_deviation", rep.max_field_deviation);
  r.add("max_population_deviation", rep.max_population_deviation);
  r.add("max_purity_deviation", rep.max_purity_deviation);
  r.add("max_excited_population", rep.max_excited_population);
  r.add("fock_cutoff", std::to_string(rep.cutoff));
  r.add("step", rep.step);
  emit_report(ctx, r);
  return kOk;
}

inline int cmd_homodyne(const Context& ctx) {
  const Settings& s = ctx.config.settings;
  const SystemConfig cfg = build_system(s);
  const ConditionalAmplitudes amps = solve_loop(cfg);
  const complex b1 = amps.at({1, 0}).beta;
  const QubitPair even{s.even_partner, s.even_partner};
  const complex b2 = amps.at(even).beta;
  DiscriminationOptions opt;
  opt.horizon_factor = s.horizon_factor;
  opt.steps_per_horizon = s.steps_per_horizon;
  opt.threads = sweep_threads();
  const DiscriminationResult res = discrimination_experiment(b1, b2, s.theta, s.trajectories, s.seed, opt);
  Report r;
  r.add("pair", "10/" + even.label());
  r.add("theta", s.theta);
  r.add("t_m", discrimination_time(b1, b2, s.theta));
  r.add("horizon", res.horizon);
  r.add("trajectories", std::to_string(res.n_traj));
  r.add("errors", std::to_string(res.errors));
  r.add("error_rate", res.error_rate);
  r.add("expected_error_rate", normal_cdf(-std::sqrt(s.horizon_factor)));
  r.add("seed", std::to_string(s.seed));
  emit_report(ctx, r);
  return kOk;
}

inline int cmd_validate(const Context& ctx) {
  const SystemConfig cfg = build_system(ctx.config.settings);
  const ValidityReport v = check_weak_driving(cfg, solve_loop(cfg));
  CsvTable t({"cavity", "partner_state", "photon_factor", "cooperativity_factor", "loop_factor",
              "product", "threshold", "pass", "loop_denominator", "constraint_bound", "constraint_pass"});
  for (const auto& e : v.entries) {
    t.add({std::to_string(e.cavity), std::to_string(e.partner_state), fmt(e.photon_factor),
           fmt(e.cooperativity_factor), fmt(e.loop_factor), fmt(e.product), fmt(v.threshold),
           e.pass ? "true" : "false", fmt(e.loop_denominator), fmt(e.constraint_bound),
           e.constraint_pass ? "true" : "false"});
  }
  ctx.out << t.str();
  if (!ctx.config.output_path.empty()) write_atomic(ctx.config.output_path, t.str());
  if (!v.all_pass()) {
    ctx.err << "weak-driving condition violated (max product " << fmt(v.max_product()) << ")\n";
    return kFailure;
  }
  return kOk;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigurationError("cannot read config file " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop two-cavity parity measurement simulator", "paritysim"};
  app.require_subcommand(1);
  std::string config_path, out_path;
  bool dump = false;
  app.add_option("--config", config_path, "configuration file (key = value)");
  app.add_option("--out", out_path, "output file, written atomically");
  app.add_flag("--dump-config", dump, "print the resolved configuration and exit");

  std::vector<std::pair<std::string, std::string>> flag_values;
  std::map<std::string, std::string> values;
  for (const auto& key : detail::known_keys())
    app.add_option("--" + key, values[key], "override config key '" + key + "'")->group("Config keys");
  std::string var, from, to, steps, doc;
  app.add_option("--var", var, "alias of --sweep_var")->group("Aliases");
  app.add_option("--from", from, "alias of --sweep_from")->group("Aliases");
  app.add_option("--to", to, "alias of --sweep_to")->group("Aliases");
  app.add_option("--steps", steps, "alias of --sweep_steps (sweep) or --transient_steps (transient)")
      ->group("Aliases");
  app.add_option("--doc", doc, "alias of --d_over_c")->group("Aliases");

  const std::vector<std::pair<std::string, std::string>> subcommands{
      {"amplitudes", "conditional beta, zeta and xi for the four qubit states (CSV)"},
      {"rates", "decoherence rates and measurement time"},
      {"sweep", "figure curves over one parameter (CSV)"},
      {"optimize", "optimal loop reflectivity r3"},
      {"transient", "time series of the output fields for a step input (CSV)"},
      {"lindblad", "full versus adiabatically eliminated master equation"},
      {"homodyne", "simulated homodyne discrimination of odd and even fields"},
      {"validate", "weak-driving and loop-denominator checks"}};
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFailure;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    ConfigOverrides overrides;
    for (const auto& key : detail::known_keys()) {
      if (app.count("--" + key)) overrides.emplace_back(key, values[key]);
    }
    if (app.count("--var")) overrides.emplace_back("sweep_var", var);
    if (app.count("--from")) overrides.emplace_back("sweep_from", from);
    if (app.count("--to")) overrides.emplace_back("sweep_to", to);
    if (app.count("--steps")) overrides.emplace_back(cmd == "transient" ? "transient_steps" : "sweep_steps", steps);
    if (app.count("--doc")) overrides.emplace_back("d_over_c", doc);

    const std::string text = config_path.empty() ? std::string() : read_file(config_path);
    Context ctx{parse_config(text, overrides), out, err};
    ctx.config.input_path = config_path;
    ctx.config.output_path = out_path;
    if (dump) {
      const std::string d = dump_settings(ctx.config.settings);
      if (out_path.empty()) out << d;
      else write_atomic(out_path, d);
      return kOk;
    }
    if (cmd == "amplitudes") return cmd_amplitudes(ctx);
    if (cmd == "rates") return cmd_rates(ctx);
    if (cmd == "sweep") return cmd_sweep(ctx);
    if (cmd == "optimize") return cmd_optimize(ctx);
    if (cmd == "transient") return cmd_transient(ctx);
    if (cmd == "lindblad") return cmd_lindblad(ctx);
    if (cmd == "homodyne") return cmd_homodyne(ctx);
    return cmd_validate(ctx);
  } catch (const SingularityError& e) {
    err << "singularity: " << e.what() << "\n";
    return kSingular;
  } catch (const ParseError& e) {
    err << "config: " << e.what() << "\n";
    return kFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"paritysim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace paritysim::cli
