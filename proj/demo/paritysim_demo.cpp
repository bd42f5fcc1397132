// Walks through the main analyses for one resonant and one nonresonant setup.

#include <cstdio>

#include "paritysim/decoherence.hpp"
#include "paritysim/homodyne.hpp"
#include "paritysim/optimizer.hpp"
#include "paritysim/transient.hpp"

using namespace paritysim;

static void report(const char* label, const SystemConfig& cfg) {
  const auto amps = solve_loop(cfg);
  const auto rep = analyze(amps, cfg);
  std::printf("%s\n", label);
  for (const auto s : kAllPairs) {
    const complex b = amps.at(s).beta;
    std::printf("  beta%s = % .6f %+.6fi\n", s.label().c_str(), b.real(), b.imag());
  }
  std::printf("  t_m = %.6g, odd exponent = %.6g, even exponent = %.6g\n", rep.t_m, rep.odd_exponent(),
              rep.even_exponent());
  for (const auto& w : rep.warnings) std::printf("  warning: %s\n", w.c_str());
}

int main() {
  const double C = 10.0;
  const double r_res = r3_opt_resonant(C, 1.0);
  report("resonant, C = 10, r3 at its optimum", make_symmetric_config(C, 0.0, r_res, 1.0, kResonantPsi, 0.3));

  const auto nr = make_symmetric_config(100.0, 138.74, 0.0, 1.0, kNonresonantPsi, 0.3, Backend::NonresonantAsymptotic);
  const auto opt = minimize_r3_numeric(nr, 10.0);
  std::printf("nonresonant optimum: numeric %.6f, closed form %.6f\n", opt.r3,
              r3_opt_nonresonant(re_F2_nonresonant(100.0, 138.74), 1.0).r3);
  report("nonresonant, D/C = 1.3874", nr.with_r3(opt.r3));

  // Time series for a switched-on drive.
  auto tcfg = make_symmetric_config(5.0, 0.0, 0.4, 1.0, kResonantPsi, 1.0, Backend::ExactMirrorAlgebra);
  tcfg.cavity1 = CavityQubitParams::from_cooperativity(5.0, 0.0, 1.0, 0.05);
  tcfg.cavity2 = tcfg.cavity1;
  const auto tr = propagate_closed_loop(tcfg, step_input(1.0, 400), 400);
  const auto ss = solve_loop(tcfg);
  std::printf("transient after 400 steps: |beta10 - steady| = %.3g\n",
              std::abs(tr.at({1, 0}).beta.back() - ss.at(1, 0).beta));

  const auto amps = solve_loop(nr);
  const auto res = discrimination_experiment(amps.at(1, 0).beta, amps.at(0, 0).beta, 0.0, 4000, 1);
  std::printf("homodyne at t_m: error rate %.4f (ideal %.4f)\n", res.error_rate, normal_cdf(-1.0));
  return 0;
}
