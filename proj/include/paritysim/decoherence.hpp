#pragma once

// Measurement time, decoherence rates within the parity subspaces and the
// final-purity estimate. The generic route works on solved amplitudes; the
// closed forms for identical cavities are a fast path checked against it.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "paritysim/core.hpp"
#include "paritysim/steady_state.hpp"

namespace paritysim {

enum class Subspace { Odd, Even };

struct MeasurementTime {
  double t00 = 0.0;
  double t11 = 0.0;
  double tm = 0.0;
  bool even_imbalance = false;
  double even_imbalance_sq = 0.0;  // |Im beta00 - Im beta11|^2
};

struct SpontaneousEmissionRates {
  double cavity1 = 0.0;
  double cavity2 = 0.0;
};

struct LossRates {
  double loop = 0.0;
  double cavity1 = 0.0;
  double cavity2 = 0.0;
};

struct DecoherenceReport {
  double t_m = 0.0;
  double t_m00 = 0.0;
  double t_m11 = 0.0;

  double nu_odd_se_1 = 0.0;
  double nu_odd_se_2 = 0.0;
  double nu_even_se_1 = 0.0;
  double nu_even_se_2 = 0.0;
  double nu_odd_loss = 0.0;
  double nu_even_loss = 0.0;
  double nu_cav_loss_odd_1 = 0.0;
  double nu_cav_loss_odd_2 = 0.0;
  double nu_cav_loss_even_1 = 0.0;
  double nu_cav_loss_even_2 = 0.0;

  bool even_imbalance = false;
  double even_imbalance_sq = 0.0;
  std::vector<std::string> warnings;

  double odd_rate() const {
    return nu_odd_se_1 + nu_odd_se_2 + nu_odd_loss + nu_cav_loss_odd_1 + nu_cav_loss_odd_2;
  }
  double even_rate() const {
    return nu_even_se_1 + nu_even_se_2 + nu_even_loss + nu_cav_loss_even_1 + nu_cav_loss_even_2;
  }
  // Exponents of the coherence factor in the final purity.
  double odd_exponent() const { return odd_rate() * t_m; }
  double even_exponent() const { return even_rate() * t_m; }

  // Loop loss relative to spontaneous emission in atom 1 (odd subspace).
  double loss_to_se_ratio() const { return nu_odd_loss / nu_odd_se_1; }
};

// ---------------------------------------------------------------------------

inline MeasurementTime measurement_time(const ConditionalAmplitudes& amps) {
  const complex alpha = amps.loop.alpha;
  const double scale = std::abs(alpha);
  if (!(scale > 0.0)) throw DegenerateMeasurementError("no input field");
  if (std::abs(alpha.imag()) > 1e-12 * scale)
    throw ParameterError("measurement time assumes a real input amplitude");
  const double p10 = amps.at(1, 0).beta.imag();
  const double p01 = amps.at(0, 1).beta.imag();
  const double p00 = amps.at(0, 0).beta.imag();
  const double p11 = amps.at(1, 1).beta.imag();
  if (std::abs(p10 - p01) >= 1e-9 * scale)
    throw ParameterError("odd-parity states differ in the measured quadrature");
  const double d00 = std::abs(p10 - p00);
  const double d11 = std::abs(p10 - p11);
  if (d00 < 1e-12 * scale && d11 < 1e-12 * scale)
    throw DegenerateMeasurementError("odd and even subspaces give the same output quadrature");

  MeasurementTime out;
  const double inf = std::numeric_limits<double>::infinity();
  out.t00 = d00 > 0.0 ? 1.0 / (d00 * d00) : inf;
  out.t11 = d11 > 0.0 ? 1.0 / (d11 * d11) : inf;
  out.tm = std::max(out.t00, out.t11);
  out.even_imbalance_sq = (p00 - p11) * (p00 - p11);
  out.even_imbalance = std::abs(p00 - p11) > 1e-9 * scale;
  return out;
}

namespace detail {

inline void require_backend(const ConditionalAmplitudes& amps, const SystemConfig& cfg) {
  if (amps.backend() != cfg.backend)
    throw ParameterError("amplitudes were solved with a different backend than the config");
}

}  // namespace detail

inline SpontaneousEmissionRates se_rates(const ConditionalAmplitudes& amps, const SystemConfig& cfg,
                                         Subspace subspace) {
  detail::require_backend(amps, cfg);
  const QubitPair s1 = subspace == Subspace::Odd ? QubitPair{1, 0} : QubitPair{1, 1};
  const QubitPair s2 = subspace == Subspace::Odd ? QubitPair{0, 1} : QubitPair{1, 1};
  const auto& rc = amps.coefficients;
  SpontaneousEmissionRates out;
  out.cavity1 = rc.response(1, 1).se_coefficient * conditional_cavity_photon_number(amps, 1, s1.first, s1.second);
  out.cavity2 = rc.response(2, 1).se_coefficient * conditional_cavity_photon_number(amps, 2, s2.first, s2.second);
  return out;
}

inline LossRates loss_rates(const ConditionalAmplitudes& amps, const SystemConfig& cfg,
                            Subspace subspace) {
  detail::require_backend(amps, cfg);
  const QubitPair sa = subspace == Subspace::Odd ? QubitPair{1, 0} : QubitPair{1, 1};
  const QubitPair sb = subspace == Subspace::Odd ? QubitPair{0, 1} : QubitPair{0, 0};
  const auto& a = amps.at(sa);
  const auto& b = amps.at(sb);
  LossRates out;
  out.loop = (1.0 - cfg.loop.eta3) * std::norm(a.zeta[2] - b.zeta[2]);
  out.cavity1 = (1.0 - cfg.cavity1.eta_cav) * std::norm(a.xi1 - b.xi1);
  out.cavity2 = (1.0 - cfg.cavity2.eta_cav) * std::norm(a.xi2 - b.xi2);
  return out;
}

// Full generic pipeline on already solved amplitudes.
inline DecoherenceReport analyze(const ConditionalAmplitudes& amps, const SystemConfig& cfg) {
  DecoherenceReport rep;
  const auto tm = measurement_time(amps);
  rep.t_m = tm.tm;
  rep.t_m00 = tm.t00;
  rep.t_m11 = tm.t11;
  rep.even_imbalance = tm.even_imbalance;
  rep.even_imbalance_sq = tm.even_imbalance_sq;
  if (tm.even_imbalance)
    rep.warnings.push_back("even-subspace imbalance: Im beta00 != Im beta11, |diff|^2 = " +
                           std::to_string(tm.even_imbalance_sq));

  const auto se_odd = se_rates(amps, cfg, Subspace::Odd);
  const auto se_even = se_rates(amps, cfg, Subspace::Even);
  const auto l_odd = loss_rates(amps, cfg, Subspace::Odd);
  const auto l_even = loss_rates(amps, cfg, Subspace::Even);
  rep.nu_odd_se_1 = se_odd.cavity1;
  rep.nu_odd_se_2 = se_odd.cavity2;
  rep.nu_even_se_1 = se_even.cavity1;
  rep.nu_even_se_2 = se_even.cavity2;
  rep.nu_odd_loss = l_odd.loop;
  rep.nu_even_loss = l_even.loop;
  rep.nu_cav_loss_odd_1 = l_odd.cavity1;
  rep.nu_cav_loss_odd_2 = l_odd.cavity2;
  rep.nu_cav_loss_even_1 = l_even.cavity1;
  rep.nu_cav_loss_even_2 = l_even.cavity2;
  return rep;
}

inline DecoherenceReport analyze(const SystemConfig& cfg) { return analyze(solve_loop(cfg), cfg); }

// ---------------------------------------------------------------------------
// Closed forms for identical cavities. Products nu * t_m do not depend on
// |alpha|^2; the rates themselves do.

namespace detail {

inline void require_closed_form_inputs(double C, double r3, double eta3, double alpha2) {
  if (!(C > 0.0) || !std::isfinite(C)) throw ParameterError("C must be positive");
  if (r3 < 0.0 || r3 >= 1.0) throw ParameterError("r3 must lie in [0, 1)");
  if (!(eta3 > 0.0) || eta3 > 1.0) throw ParameterError("eta3 must lie in (0, 1]");
  if (!(alpha2 > 0.0)) throw ParameterError("|alpha|^2 must be positive");
}

}  // namespace detail

// Dimensionless products of the closed forms. Loss products are given per
// unit (1 - eta3) so that the eta3 -> 1 limit stays finite.
struct ClosedFormProducts {
  double tm_inv_per_alpha2 = 0.0;   // t_m^-1 / |alpha|^2
  double t00_inv_per_alpha2 = 0.0;
  double odd_se1 = 0.0;             // nu_odd,1^(SE) t_m
  double odd_se2 = 0.0;
  double even_se1 = 0.0;
  double even_se2 = 0.0;
  double odd_loss_unit = 0.0;       // nu_odd^(L) t_m / (1 - eta3)
  double even_loss_unit = 0.0;
  double even_imbalance_per_alpha = 0.0;  // |Im beta00 - Im beta11| / |alpha|
  bool regime_warning = false;
};

// Phase-only nonresonant model, P = -1.
inline ClosedFormProducts nonresonant_products(double C, double D, double r3, double eta3) {
  detail::require_closed_form_inputs(C, r3, eta3, 1.0);
  const complex F = complex(D, C) / complex(D, -C);
  const double c = (F * F).real();
  const double im2 = F.imag() * F.imag();
  const double s = std::sqrt(eta3);
  const double sr = s * r3;
  const double q = 1.0 + 2.0 * sr * c + eta3 * r3 * r3;  // |1 + s r F^2|^2
  const double one_m_r2 = 1.0 - r3 * r3;
  const double one_m_sr = 1.0 - sr;
  const double one_p_sr = 1.0 + sr;
  const double one_m_c = 1.0 - c;
  if (q < 1e-15 || one_m_sr < 1e-15)
    throw SingularityError("constructive-interference pole in the nonresonant closed form");
  if (one_m_c < 1e-15) throw DegenerateMeasurementError("F^2 = 1: subspaces indistinguishable");

  ClosedFormProducts p;
  p.tm_inv_per_alpha2 = eta3 * one_m_r2 * one_m_r2 * one_m_sr * one_m_sr * one_m_c * one_m_c /
                        (one_p_sr * one_p_sr * q * q);
  p.t00_inv_per_alpha2 = p.tm_inv_per_alpha2;
  const double base = eta3 * one_m_r2 * one_m_sr * one_m_sr * one_m_c * one_m_c;
  p.odd_se1 = 8.0 * C * q * q / ((C * C + D * D) * base);
  p.even_se1 = 8.0 * C * one_p_sr * one_p_sr * q / ((C * C + D * D) * base);
  p.odd_se2 = eta3 * p.odd_se1;
  p.even_se2 = eta3 * p.even_se1;
  p.odd_loss_unit = 4.0 * im2 * q * q / base;
  p.even_loss_unit = 4.0 * im2 * one_p_sr * one_p_sr / (eta3 * one_m_c * one_m_c * one_m_r2);
  p.regime_warning = C < 10.0 || std::abs(D) < 0.1 * C || std::abs(D) > 10.0 * C;
  return p;
}

// Resonant model D = 0, P = +1, G = (1 - 2C)/(1 + 2C).
inline ClosedFormProducts resonant_products(double C, double r3, double eta3) {
  detail::require_closed_form_inputs(C, r3, eta3, 1.0);
  const double G = (1.0 - 2.0 * C) / (1.0 + 2.0 * C);
  const double G2 = G * G;
  const double s = std::sqrt(eta3);
  const double sr = s * r3;
  const double one_m_r2 = 1.0 - r3 * r3;
  const double a = 1.0 - sr * G;
  const double b = 1.0 - sr * G2;
  const double one_m_sr = 1.0 - sr;
  if (a < 1e-15 || b < 1e-15 || one_m_sr < 1e-15)
    throw SingularityError("constructive-interference pole in the resonant closed form");
  if (G2 < 1e-300) throw DegenerateMeasurementError("G = 0: cavity 1 in |1> blocks nothing");
  const double gm1 = G - 1.0;

  ClosedFormProducts p;
  p.tm_inv_per_alpha2 = eta3 * G2 * gm1 * gm1 * one_m_r2 * one_m_r2 / (a * a * b * b);
  p.t00_inv_per_alpha2 = eta3 * gm1 * gm1 * one_m_r2 * one_m_r2 / (a * a * one_m_sr * one_m_sr);
  const double pref =
      8.0 * C / ((1.0 + 2.0 * C) * (1.0 + 2.0 * C) * eta3 * G2 * gm1 * gm1 * one_m_r2);
  p.odd_se1 = pref * b * b;
  p.even_se1 = pref * a * a;
  p.odd_se2 = eta3 * p.odd_se1;
  p.even_se2 = eta3 * G2 * p.even_se1;
  p.odd_loss_unit = b * b / (eta3 * G2 * one_m_r2);
  const double e = 1.0 - eta3 * r3 * r3 * G2;
  p.even_loss_unit = e * e / (eta3 * G2 * one_m_r2 * one_m_sr * one_m_sr);
  p.even_imbalance_per_alpha = s * (1.0 - G2) * one_m_r2 / (one_m_sr * b);
  return p;
}

namespace detail {

inline DecoherenceReport report_from_products(const ClosedFormProducts& p, double eta3,
                                              double alpha2) {
  DecoherenceReport rep;
  rep.t_m = 1.0 / (p.tm_inv_per_alpha2 * alpha2);
  rep.t_m11 = rep.t_m;
  rep.t_m00 = 1.0 / (p.t00_inv_per_alpha2 * alpha2);
  const double tm = rep.t_m;
  rep.nu_odd_se_1 = p.odd_se1 / tm;
  rep.nu_odd_se_2 = p.odd_se2 / tm;
  rep.nu_even_se_1 = p.even_se1 / tm;
  rep.nu_even_se_2 = p.even_se2 / tm;
  rep.nu_odd_loss = (1.0 - eta3) * p.odd_loss_unit / tm;
  rep.nu_even_loss = (1.0 - eta3) * p.even_loss_unit / tm;
  rep.even_imbalance_sq = p.even_imbalance_per_alpha * p.even_imbalance_per_alpha * alpha2;
  rep.even_imbalance = p.even_imbalance_per_alpha > 1e-9;
  if (rep.even_imbalance)
    rep.warnings.push_back("even-subspace imbalance: Im beta00 != Im beta11, |diff|^2 = " +
                           std::to_string(rep.even_imbalance_sq));
  if (p.regime_warning)
    rep.warnings.push_back("parameters outside the D ~ C >> 1 regime of the phase-only model");
  return rep;
}

}  // namespace detail

inline DecoherenceReport closed_form_nonresonant(double C, double D, double r3, double eta3,
                                                 double alpha2) {
  detail::require_closed_form_inputs(C, r3, eta3, alpha2);
  return detail::report_from_products(nonresonant_products(C, D, r3, eta3), eta3, alpha2);
}

inline DecoherenceReport closed_form_resonant(double C, double r3, double eta3, double alpha2) {
  detail::require_closed_form_inputs(C, r3, eta3, alpha2);
  return detail::report_from_products(resonant_products(C, r3, eta3), eta3, alpha2);
}

// ---------------------------------------------------------------------------

// a|10> + b|01>
struct OddSubspaceState {
  complex a{1.0, 0.0};
  complex b{0.0, 0.0};

  void validate() const {
    if (std::abs(std::norm(a) + std::norm(b) - 1.0) > 1e-12)
      throw ParameterError("subspace state must be normalized");
  }
  double c_first() const { return std::norm(a); }
  double c_second() const { return std::norm(b); }
  complex coherence() const { return a * std::conj(b); }
};

// a|11> + b|00>
struct EvenSubspaceState : OddSubspaceState {};

struct PurityBound {
  double value = 1.0;
  bool even_imbalance_warning = false;
};

inline double purity_from_exponent(const OddSubspaceState& state, double exponent) {
  state.validate();
  const double p = state.c_first(), q = state.c_second();
  return p * p + q * q + 2.0 * std::norm(state.coherence()) * std::exp(-exponent);
}

inline PurityBound purity_bound(const OddSubspaceState& state, const DecoherenceReport& report) {
  return {purity_from_exponent(state, report.odd_exponent()), false};
}

// Even subspace: only meaningful when Im beta00 = Im beta11; otherwise the
// formula value is returned with a warning.
inline PurityBound purity_bound(const EvenSubspaceState& state, const DecoherenceReport& report) {
  return {purity_from_exponent(state, report.even_exponent()), report.even_imbalance};
}

}  // namespace paritysim
