// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "paritysim/decoherence.hpp"
#include "paritysim/homodyne.hpp"
#include "paritysim/lindblad.hpp"
#include "paritysim/optimizer.hpp"
#include "paritysim/steady_state.hpp"
#include "paritysim/transient.hpp"

using namespace paritysim;

namespace {

constexpr complex I{0.0, 1.0};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome limiting_amplitudes() {
  Outcome o;
  double worst = 0.0;
  for (double r3 : {0.0, 0.5, 0.9})
    for (double a : {0.1, 1.0, 2.5}) {
      const auto amps = solve_loop(make_symmetric_config(1e6, 0.0, r3, 1.0, kResonantPsi, a));
      const double d00 = std::abs(amps.at(0, 0).beta + I * a);
      const double d10 = std::abs(amps.at(1, 0).beta - I * a);
      const double d11 = std::abs(amps.at(1, 1).beta + I * a);
      worst = std::max({worst, d10 / a, d11 / a});
      o.require(d00 < 1e-12 * a, "beta00 != -i alpha");
      o.require(amps.at(1, 0).beta == amps.at(0, 1).beta, "beta10 != beta01");
      o.require(d10 < 1e-4 * a && d11 < 1e-4 * a, "limit not reached");
    }
  o.note("max relative deviation " + num(worst));
  return o;
}

SystemConfig random_identical(std::mt19937_64& rng, Backend b, double kt) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double C = 200.0 * u(rng);
  const double D = 400.0 * (u(rng) - 0.5);
  auto cfg = make_symmetric_config(C, D, 0.95 * u(rng), 0.5 + 0.5 * u(rng), 6.28 * u(rng),
                                   complex(2.0 * u(rng), 2.0 * (u(rng) - 0.5)), b);
  cfg.cavity1 = CavityQubitParams::from_cooperativity(C, D, 1.0, kt, 0.99 + 0.01 * u(rng));
  cfg.cavity2 = cfg.cavity1;
  return cfg;
}

Outcome odd_symmetry() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Backend backends[] = {Backend::ExactMirrorAlgebra, Backend::HighFinesseFirstOrder,
                              Backend::NonresonantAsymptotic};
  double worst_ss = 0.0, worst_tr = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Backend b = backends[k % 3];
    auto cfg = random_identical(rng, b, 1e-4 + 0.05 * u(rng));
    if (b == Backend::NonresonantAsymptotic && derived_params(cfg.cavity1).D == 0.0) cfg.backend = Backend::ExactMirrorAlgebra;
    const auto ss = solve_loop(cfg);
    const double scale = std::max(1.0, std::abs(cfg.loop.alpha));
    worst_ss = std::max(worst_ss, std::abs(ss.at(1, 0).beta - ss.at(0, 1).beta) / scale);
    const auto tr = propagate_closed_loop(cfg, step_input(cfg.loop.alpha, 500), 500);
    for (std::size_t n = 0; n < tr.size(); ++n)
      worst_tr = std::max(worst_tr, std::abs(tr.at({1, 0}).beta[n] - tr.at({0, 1}).beta[n]) / scale);
  }
  o.require(worst_ss <= 1e-14, "steady state asymmetric");
  o.require(worst_tr <= 1e-14, "transient asymmetric");
  o.note("max |beta10 - beta01| steady " + num(worst_ss) + ", transient " + num(worst_tr));
  return o;
}

Outcome closed_form_equivalence() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  auto cmp = [&](const DecoherenceReport& a, const DecoherenceReport& b) {
    for (auto [x, y] : {std::pair{a.t_m, b.t_m}, {a.t_m00, b.t_m00}, {a.nu_odd_se_1, b.nu_odd_se_1},
                        {a.nu_odd_se_2, b.nu_odd_se_2}, {a.nu_even_se_1, b.nu_even_se_1},
                        {a.nu_even_se_2, b.nu_even_se_2}, {a.nu_odd_loss, b.nu_odd_loss},
                        {a.nu_even_loss, b.nu_even_loss}})
      worst = std::max(worst, rel(x, y));
  };
  for (int k = 0; k < 100; ++k) {
    const double C = 2.0 + 500.0 * u(rng);
    const double D = C * (0.2 + 3.0 * u(rng)) * (u(rng) < 0.5 ? -1.0 : 1.0);
    const double r3 = 0.9 * u(rng), eta3 = 0.5 + 0.499 * u(rng), a = 0.1 + 2.0 * u(rng);
    cmp(analyze(make_symmetric_config(C, D, r3, eta3, kNonresonantPsi, a, Backend::NonresonantAsymptotic)),
        closed_form_nonresonant(C, D, r3, eta3, a * a));
    cmp(analyze(make_symmetric_config(C, 0.0, r3, eta3, kResonantPsi, a)), closed_form_resonant(C, r3, eta3, a * a));
  }
  o.require(worst <= 1e-10, "closed form differs from pipeline");
  o.note("max relative difference " + num(worst));
  return o;
}

Outcome figure2() {
  Outcome o;
  SweepSpec spec;
  spec.d_over_c = 1.0;
  spec.eta3 = 1.0;
  const auto t = run_sweep(spec);
  double worst = 0.0;
  for (const auto& row : t.rows) {
    const double r = row.value, expect = (1.0 - r) / (1.0 + r);
    worst = std::max({worst, std::abs(row.columns[0] - expect), std::abs(row.columns[2] - expect)});
    if (r > 0.0) o.require(row.columns[1] > row.columns[0] && row.columns[3] > row.columns[2], "even below odd at r3=" + num(r));
  }
  o.require(std::abs(t.rows.front().columns[0] - 1.0) <= 1e-9, "odd SE at r3=0 is not 1");
  o.require(worst <= 1e-9, "odd curves deviate from (1-r3)/(1+r3)");
  o.note(std::to_string(t.rows.size()) + " grid points, max deviation " + num(worst));
  return o;
}

Outcome optima() {
  Outcome o;
  const auto res = minimize_r3_numeric(make_symmetric_config(10.0, 0.0, 0.0, 1.0, kResonantPsi, 1.0), 1.0);
  o.require(std::abs(res.r3 - r3_opt_resonant(10.0, 1.0)) <= 1e-5 && std::abs(res.r3 - 0.818594) <= 1e-5,
            "resonant optimum " + num(res.r3));

  const double doc = 1.0 / std::tan(0.25 * std::acos(-0.8));
  const auto nr = minimize_r3_numeric(
      make_symmetric_config(100.0, 100.0 * doc, 0.0, 1.0, kNonresonantPsi, 1.0, Backend::NonresonantAsymptotic), 10.0);
  o.require(std::abs(nr.r3 - r3_opt_nonresonant(-0.8, 1.0).r3) <= 1e-5 && std::abs(nr.r3 - 0.26795) <= 1e-5,
            "nonresonant optimum " + num(nr.r3));

  double last = 0.0;
  for (double d : {1.1, 1.01, 1.001, 1.0001}) {
    const double r = r3_opt_nonresonant(re_F2_nonresonant(100.0, 100.0 * d), 1.0).r3;
    o.require(r > last, "unconstrained optimum not increasing towards D/C = 1");
    last = r;
  }
  o.require(last > 0.99, "unconstrained optimum does not approach 1");

  const auto cfg = make_symmetric_config(100.0, 100.0, 0.0, 1.0, kNonresonantPsi, 1.0, Backend::NonresonantAsymptotic);
  const auto clip = minimize_r3_numeric(cfg, 10.0);
  const auto rc = reflection_coefficients(cfg);
  const complex w = cfg.loop.phase_factor() * rc.F(1, 1) * rc.F(2, 1);
  o.require(clip.constraint_active, "constraint not active at D = C");
  o.require(std::abs(std::abs(1.0 - clip.r3 * w) - 0.1) <= 1e-5, "clip not on the constraint boundary");
  o.note("resonant " + num(res.r3) + ", Re(F^2)=-0.8 " + num(nr.r3) + ", D/C->1 " + num(last) + ", clipped at " +
         num(clip.r3));
  return o;
}

Outcome transient_oracle() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const bool identical = k % 2 == 0;
    LoopNetwork net;
    for (int q = 0; q < 2; ++q) {
      const double t2 = 0.01 + 0.5 * u(rng);
      net.t[q] = std::sqrt(t2);
      net.r[q] = std::sqrt(1.0 - t2);
      net.f[q][0] = std::polar(1.0, 0.5 * (u(rng) - 0.5));
      net.f[q][1] = std::polar(0.3 + 0.7 * u(rng), 6.0 * u(rng));
    }
    if (identical) {
      net.t[1] = net.t[0];
      net.r[1] = net.r[0];
      net.f[1] = net.f[0];
    }
    net.r3 = 0.95 * u(rng);
    net.t3 = std::sqrt(1.0 - net.r3 * net.r3);
    net.sqrt_eta3 = std::sqrt(0.5 + 0.5 * u(rng));
    net.P = std::polar(1.0, 6.0 * u(rng));
    net.loop_delay_steps = 1 + k % 3;
    std::vector<complex> alpha(200);
    for (auto& a : alpha) a = complex(g(rng), g(rng));
    const auto a = propagate_closed_loop(net, alpha, 200);
    const auto b = propagate_naive_network(net, alpha, 200);
    for (const auto s : kAllPairs)
      for (std::size_t i = 0; i < 200; ++i)
        worst = std::max(worst, std::abs(a.at(s).beta[i] - b.at(s).beta[i]) / std::max(1.0, std::abs(b.at(s).beta[i])));
  }
  o.require(worst <= 1e-10, "recursion and naive network disagree");
  o.note("oracle max difference " + num(worst));

  // Constant input, exact backend, kappa tau = 0.01: 10 / (kappa tau) steps.
  const double kt = 0.01;
  auto cfg = make_symmetric_config(1.0, 0.0, 0.0, 1.0, kResonantPsi, 1.0, Backend::ExactMirrorAlgebra);
  cfg.cavity1 = CavityQubitParams::from_cooperativity(1.0, 0.0, 1.0, kt);
  cfg.cavity2 = cfg.cavity1;
  const int n = static_cast<int>(std::lround(10.0 / kt));
  const auto ss = solve_loop(cfg);
  const auto tr = propagate_closed_loop(cfg, step_input(1.0, n), n);
  std::string devs;
  for (const auto s : kAllPairs) {
    const double d = std::abs(tr.at(s).beta.back() - ss.at(s).beta);
    devs += " " + s.label() + ":" + num(d);
    o.require(d <= 1e-6, "state " + s.label() + " not converged after " + std::to_string(n) + " steps");
  }
  o.note("steady-state deviation" + devs);
  return o;
}

Outcome adiabatic_elimination() {
  Outcome o;
  double worst = 0.0;
  for (double Delta : {0.0, 5.0}) {
    auto c = CavityQubitParams::from_mirror(1.0, 1.0, Delta, 0.1, 0.01).with_cavity_detuning(0.0);
    const auto p = lindblad::LightAtomParams::from_cavity(c);
    const auto ev = lindblad::evolve_reduced(lindblad::ProductState{{0.0, 1.0}, complex(0.1, 0.0)}, p, c.tau);
    const complex f = round_trip_factor(c, 1);
    worst = std::max(worst, std::abs(ev.samples.back().field / 0.1 - f) / std::abs(f));
  }
  o.require(worst <= 1e-6, "reduced decay differs from the round-trip factor");
  o.note("decay mismatch " + num(worst));

  const lindblad::LightAtomParams base{1.0, 1.0, 0.0};
  double last = std::numeric_limits<double>::infinity();
  std::string path;
  for (double k2 : {1000.0, 2000.0, 4000.0, 10000.0}) {
    const auto rep = lindblad::compare_elimination(lindblad::scaled(base, std::sqrt(k2)), complex(0.5, 0.0), 0.1);
    if (k2 == 1000.0) o.require(rep.condition_ratio == 1e-3 && rep.max_field_deviation < 1e-2, "deviation at ratio 1e-3");
    o.require(rep.max_field_deviation < last, "deviation not decreasing");
    last = rep.max_field_deviation;
    path += " " + num(rep.condition_ratio) + "->" + num(rep.max_field_deviation);
  }
  o.note("ratio->deviation" + path);
  return o;
}

Outcome homodyne() {
  Outcome o;
  const auto amps = solve_loop(make_symmetric_config(100.0, 100.0, 0.3, 1.0, kNonresonantPsi, 0.5));
  const complex b1 = amps.at(1, 0).beta, b2 = amps.at(0, 0).beta;
  const auto tm = measurement_time(amps);
  const double td = discrimination_time(b1, b2, 0.0);
  o.require(rel(td, tm.t00) <= 1e-12, "discrimination time differs from t_m00");
  const double t11 = discrimination_time(b1, amps.at(1, 1).beta, 0.0);
  o.require(rel(t11, tm.t11) <= 1e-12, "discrimination time differs from t_m11");
  for (auto [f, tol] : {std::pair{1.0, 0.011}, {4.0, 0.005}}) {
    DiscriminationOptions opt;
    opt.horizon_factor = f;
    opt.steps_per_horizon = 200;
    opt.threads = sweep_threads();
    const auto res = discrimination_experiment(b1, b2, 0.0, 10000, 2024, opt);
    const double expect = normal_cdf(-std::sqrt(f));
    o.require(std::abs(res.error_rate - expect) <= tol, "error rate at " + num(f) + " t_m");
    o.note(num(f) + " t_m: " + num(res.error_rate) + " vs " + num(expect));
  }
  return o;
}

Outcome purity() {
  Outcome o;
  const double h = 1.0 / std::sqrt(2.0);
  const double p = purity_from_exponent({h, h}, std::log(2.0));
  o.require(std::abs(p - 0.75) <= 1e-14, "purity " + num(p));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::exponential_distribution<double> e(0.5);
  int bad = 0;
  for (int k = 0; k < 10000; ++k) {
    complex a(g(rng), g(rng)), b(g(rng), g(rng));
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    a /= n;
    b /= n;
    const double v = purity_from_exponent({a, b}, e(rng));
    const double lo = std::pow(std::norm(a), 2) + std::pow(std::norm(b), 2);
    if (v < lo - 1e-15 || v > 1.0 + 1e-15) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " samples outside the bound");
  o.note("analytic case " + num(p) + ", 10000 random states within bounds");
  return o;
}

Outcome factor_of_two() {
  Outcome o;
  const double C = 1000.0;
  const double res = resonant_products(C, 0.0, 1.0).odd_se1;
  const double nr = nonresonant_products(C, C, 0.0, 1.0).odd_se1;
  const auto rp = analyze(make_symmetric_config(C, 0.0, 0.0, 1.0, kResonantPsi, 1.0));
  const auto np = analyze(make_symmetric_config(C, C, 0.0, 1.0, kNonresonantPsi, 1.0, Backend::NonresonantAsymptotic));
  const double ratio = res / nr;
  const double ratio_pipeline = (rp.nu_odd_se_1 * rp.t_m) / (np.nu_odd_se_1 * np.t_m);
  o.require(std::abs(ratio - 0.5) <= 0.005, "closed-form ratio " + num(ratio));
  o.require(std::abs(ratio_pipeline - 0.5) <= 0.005, "pipeline ratio " + num(ratio_pipeline));
  o.note("resonant/nonresonant " + num(ratio));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"limiting amplitudes", limiting_amplitudes},
      {"odd-subspace symmetry", odd_symmetry},
      {"closed form vs pipeline", closed_form_equivalence},
      {"figure 2 spot values", figure2},
      {"optima", optima},
      {"transient oracle and convergence", transient_oracle},
      {"adiabatic elimination", adiabatic_elimination},
      {"homodyne statistics", homodyne},
      {"purity formula", purity},
      {"factor of two", factor_of_two}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
