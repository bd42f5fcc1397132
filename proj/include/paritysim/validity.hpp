#pragma once

// Weak-driving check: the excited-state population of each atom must stay
// small for the reduced light-atom model to hold.

#include <array>
#include <cmath>
#include <vector>

#include "paritysim/core.hpp"
#include "paritysim/steady_state.hpp"

namespace paritysim {

struct ValidityEntry {
  int cavity = 1;         // atom that is driven (in |1>)
  int partner_state = 0;  // state of the other atom
  double photon_factor = 0.0;       // 2 |alpha|^2 / Gamma
  double cooperativity_factor = 0.0;
  double loop_factor = 0.0;         // t3^2 / |1 - r3 P F F sqrt(eta3)|^2
  double product = 0.0;
  double loop_denominator = 0.0;    // |1 - r3 P F F sqrt(eta3)|
  double constraint_bound = 0.0;    // margin / C_q
  bool pass = true;
  bool constraint_pass = true;
};

struct ValidityReport {
  std::vector<ValidityEntry> entries;
  double threshold = 0.1;
  double margin = 10.0;

  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass || !e.constraint_pass) return false;
    return true;
  }
  double max_product() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.product);
    return m;
  }
};

inline double cooperativity_factor(double C, double D) {
  const double a = 1.0 + D * D;
  return 4.0 * C * a / ((a + 2.0 * C) * (a + 2.0 * C) + C * C * D * D);
}

inline ValidityReport check_weak_driving(const SystemConfig& cfg,
                                         const ConditionalAmplitudes& amps) {
  ValidityReport report;
  report.threshold = cfg.validity_threshold;
  report.margin = cfg.constraint_margin;
  const auto& loop = cfg.loop;
  for (int q = 1; q <= 2; ++q) {
    const auto& cav = cfg.cavity(q);
    const auto [C, D] = derived_params(cav);
    for (int partner = 0; partner <= 1; ++partner) {
      const QubitPair s = q == 1 ? QubitPair{1, partner} : QubitPair{partner, 1};
      ValidityEntry e;
      e.cavity = q;
      e.partner_state = partner;
      e.photon_factor = 2.0 * std::norm(loop.alpha) / cav.Gamma;
      e.cooperativity_factor = cooperativity_factor(C, D);
      e.loop_denominator = std::abs(loop_denominator(amps.coefficients, loop, s));
      e.loop_factor = loop.t3 * loop.t3 / (e.loop_denominator * e.loop_denominator);
      e.product = e.photon_factor * e.cooperativity_factor * e.loop_factor;
      e.pass = e.product < cfg.validity_threshold;
      e.constraint_bound = C > 0.0 ? cfg.constraint_margin / C : std::numeric_limits<double>::infinity();
      e.constraint_pass = e.loop_denominator > e.constraint_bound;
      report.entries.push_back(e);
    }
  }
  return report;
}

}  // namespace paritysim
