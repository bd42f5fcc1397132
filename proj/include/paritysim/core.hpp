#pragma once

// Parameter types for the two-cavity closed-loop parity measurement.
//
// All rates are in units of the atomic decay rate of cavity 1 (Gamma1 = 1)
// and times in units of 1/Gamma1. The input amplitude alpha carries units of
// sqrt(photons / time) in the same system.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "paritysim/error.hpp"

namespace paritysim {

using complex = std::complex<double>;

inline constexpr complex kI{0.0, 1.0};

// Which model maps the atom/cavity constants to reflection coefficients.
enum class Backend {
  ExactMirrorAlgebra,     // f from the round-trip exponential, F = (f - r)/(1 - r f)
  HighFinesseFirstOrder,  // f and r expanded to first order in t^2
  NonresonantAsymptotic,  // F^1 = (D + iC)/(D - iC), F^0 = conj(F^1), 1 + D^2 -> D^2
};

inline std::string to_string(Backend b) {
  switch (b) {
    case Backend::ExactMirrorAlgebra:
      return "exact";
    case Backend::HighFinesseFirstOrder:
      return "first_order";
    case Backend::NonresonantAsymptotic:
      return "nonresonant_asymptotic";
  }
  return "unknown";
}

struct DerivedParams {
  double C;  // cooperativity 2 g^2 / (kappa Gamma)
  double D;  // scaled atomic detuning 2 Delta / Gamma
};

// Constants of one atom + cavity.
struct CavityQubitParams {
  double g = 0.0;
  double Gamma = 1.0;
  double Delta = 0.0;
  double kappa = 1.0;
  double tau = 1e-4;
  double r_mirror = std::sqrt(1.0 - 1e-4);
  double t_mirror = 1e-2;
  double eta_cav = 1.0;
  double delta_cav = 0.0;
  bool auto_detuning = true;

  // Build from cooperativity and scaled detuning. The atomic decay rate sets
  // the unit; kappa and tau fix the coupler transmission t^2 = kappa tau.
  static CavityQubitParams from_cooperativity(double C, double D, double kappa = 1.0,
                                              double tau = 1e-4, double eta_cav = 1.0,
                                              double Gamma = 1.0);

  // Build from the microscopic constants; kappa follows from t^2 / tau.
  static CavityQubitParams from_mirror(double g, double Gamma, double Delta, double t_mirror,
                                       double tau, double eta_cav = 1.0);

  CavityQubitParams with_coupling(double new_g) const;
  CavityQubitParams with_atom_detuning(double new_Delta) const;
  CavityQubitParams with_intracavity_survival(double new_eta) const;
  CavityQubitParams with_cavity_detuning(double new_delta) const;  // disables auto-detuning

  // Re-applies the auto-detuning rule (if enabled) and checks invariants.
  CavityQubitParams refreshed() const;

  void validate() const;
};

// Loop-level constants: input beam splitter, loop loss, phase and drive.
struct LoopParams {
  double r3 = 0.0;
  double t3 = 1.0;
  double eta3 = 1.0;
  double psi = 0.0;  // P = exp(i psi)
  complex alpha{1.0, 0.0};

  static LoopParams make(double r3, double eta3, double psi, complex alpha);

  complex phase_factor() const { return std::polar(1.0, psi); }
  double sqrt_eta3() const { return std::sqrt(eta3); }

  void validate() const;
};

struct SystemConfig {
  CavityQubitParams cavity1;
  CavityQubitParams cavity2;
  LoopParams loop;
  Backend backend = Backend::HighFinesseFirstOrder;
  double validity_threshold = 0.1;
  double constraint_margin = 10.0;

  const CavityQubitParams& cavity(int q) const;

  SystemConfig with_r3(double r3) const;

  void validate() const;
};

// ---------------------------------------------------------------------------

namespace detail {

inline void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ParameterError(std::string(name) + " is not finite");
}

}  // namespace detail

inline DerivedParams derived_params(const CavityQubitParams& c) {
  if (!(c.kappa > 0.0) || !(c.Gamma > 0.0))
    throw ParameterError("kappa and Gamma must be positive");
  const double C = 2.0 * c.g * c.g / (c.kappa * c.Gamma);
  const double D = 2.0 * c.Delta / c.Gamma;
  detail::require_finite(C, "cooperativity C");
  detail::require_finite(D, "detuning D");
  return {C, D};
}

// Cavity detuning for which 2 delta / kappa = D C / (1 + D^2).
inline double auto_cavity_detuning(const CavityQubitParams& c) {
  const auto [C, D] = derived_params(c);
  return 0.5 * c.kappa * D * C / (1.0 + D * D);
}

inline void CavityQubitParams::validate() const {
  detail::require_finite(g, "g");
  detail::require_finite(Gamma, "Gamma");
  detail::require_finite(Delta, "Delta");
  detail::require_finite(kappa, "kappa");
  detail::require_finite(tau, "tau");
  detail::require_finite(delta_cav, "delta_cav");
  if (g < 0.0) throw ParameterError("g must be non-negative");
  if (!(Gamma > 0.0)) throw ParameterError("Gamma must be positive");
  if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  if (r_mirror < 0.0 || r_mirror >= 1.0 || t_mirror <= 0.0 || t_mirror > 1.0)
    throw ParameterError("mirror amplitudes must satisfy 0 <= r < 1, 0 < t <= 1");
  if (std::abs(r_mirror * r_mirror + t_mirror * t_mirror - 1.0) > 1e-12)
    throw ParameterError("mirror amplitudes must satisfy r^2 + t^2 = 1");
  if (std::abs(kappa - t_mirror * t_mirror / tau) > 1e-9 * kappa)
    throw ParameterError("kappa must equal t^2 / tau");
  if (!(eta_cav > 0.0) || eta_cav > 1.0) throw ParameterError("eta_cav must lie in (0, 1]");
  static_cast<void>(derived_params(*this));
  if (auto_detuning && std::abs(delta_cav - auto_cavity_detuning(*this)) >
                           1e-12 * std::max(1.0, std::abs(delta_cav)))
    throw ParameterError("delta_cav does not follow the auto-detuning rule");
}

inline CavityQubitParams CavityQubitParams::refreshed() const {
  CavityQubitParams c = *this;
  if (c.auto_detuning) c.delta_cav = auto_cavity_detuning(c);
  c.validate();
  return c;
}

inline CavityQubitParams CavityQubitParams::from_cooperativity(double C, double D, double kappa,
                                                               double tau, double eta_cav,
                                                               double Gamma) {
  detail::require_finite(C, "C");
  detail::require_finite(D, "D");
  if (C < 0.0) throw ParameterError("C must be non-negative");
  if (!(kappa > 0.0) || !(tau > 0.0)) throw ParameterError("kappa and tau must be positive");
  const double t2 = kappa * tau;
  if (!(t2 < 1.0)) throw ParameterError("kappa * tau must be below 1 (t^2 < 1)");
  CavityQubitParams c;
  c.Gamma = Gamma;
  c.g = std::sqrt(0.5 * C * kappa * Gamma);
  c.Delta = 0.5 * D * Gamma;
  c.kappa = kappa;
  c.tau = tau;
  c.t_mirror = std::sqrt(t2);
  c.r_mirror = std::sqrt(1.0 - t2);
  c.eta_cav = eta_cav;
  c.auto_detuning = true;
  return c.refreshed();
}

inline CavityQubitParams CavityQubitParams::from_mirror(double g, double Gamma, double Delta,
                                                        double t_mirror, double tau,
                                                        double eta_cav) {
  if (!(t_mirror > 0.0) || t_mirror > 1.0) throw ParameterError("t_mirror must lie in (0, 1]");
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  CavityQubitParams c;
  c.g = g;
  c.Gamma = Gamma;
  c.Delta = Delta;
  c.t_mirror = t_mirror;
  c.r_mirror = std::sqrt(1.0 - t_mirror * t_mirror);
  c.tau = tau;
  c.kappa = t_mirror * t_mirror / tau;
  c.eta_cav = eta_cav;
  c.auto_detuning = true;
  return c.refreshed();
}

inline CavityQubitParams CavityQubitParams::with_coupling(double new_g) const {
  CavityQubitParams c = *this;
  c.g = new_g;
  return c.refreshed();
}

inline CavityQubitParams CavityQubitParams::with_atom_detuning(double new_Delta) const {
  CavityQubitParams c = *this;
  c.Delta = new_Delta;
  return c.refreshed();
}

inline CavityQubitParams CavityQubitParams::with_intracavity_survival(double new_eta) const {
  CavityQubitParams c = *this;
  c.eta_cav = new_eta;
  return c.refreshed();
}

inline CavityQubitParams CavityQubitParams::with_cavity_detuning(double new_delta) const {
  CavityQubitParams c = *this;
  c.auto_detuning = false;
  c.delta_cav = new_delta;
  return c.refreshed();
}

inline LoopParams LoopParams::make(double r3, double eta3, double psi, complex alpha) {
  LoopParams l;
  l.r3 = r3;
  l.t3 = std::sqrt(std::max(0.0, 1.0 - r3 * r3));
  l.eta3 = eta3;
  l.psi = psi;
  l.alpha = alpha;
  l.validate();
  return l;
}

inline void LoopParams::validate() const {
  detail::require_finite(r3, "r3");
  detail::require_finite(t3, "t3");
  detail::require_finite(eta3, "eta3");
  detail::require_finite(psi, "psi");
  detail::require_finite(alpha.real(), "alpha");
  detail::require_finite(alpha.imag(), "alpha");
  if (r3 < 0.0 || r3 >= 1.0) throw ParameterError("r3 must lie in [0, 1)");
  if (std::abs(r3 * r3 + t3 * t3 - 1.0) > 1e-12)
    throw ParameterError("loop amplitudes must satisfy r3^2 + t3^2 = 1");
  if (!(eta3 > 0.0) || eta3 > 1.0) throw ParameterError("eta3 must lie in (0, 1]");
}

inline const CavityQubitParams& SystemConfig::cavity(int q) const {
  if (q == 1) return cavity1;
  if (q == 2) return cavity2;
  throw ParameterError("cavity index must be 1 or 2");
}

inline SystemConfig SystemConfig::with_r3(double r3) const {
  SystemConfig c = *this;
  c.loop = LoopParams::make(r3, loop.eta3, loop.psi, loop.alpha);
  return c;
}

inline void SystemConfig::validate() const {
  cavity1.validate();
  cavity2.validate();
  loop.validate();
  if (!(validity_threshold > 0.0) || !(validity_threshold < 1.0))
    throw ParameterError("validity_threshold must lie in (0, 1)");
  if (!(constraint_margin >= 1.0)) throw ParameterError("constraint_margin must be >= 1");
}

// Identical cavities from (C, D); the loop phase defaults follow the
// destructive-interference choice for the protected odd subspace.
inline SystemConfig make_symmetric_config(double C, double D, double r3, double eta3,
                                          double psi, complex alpha,
                                          Backend backend = Backend::HighFinesseFirstOrder) {
  SystemConfig cfg;
  cfg.cavity1 = CavityQubitParams::from_cooperativity(C, D);
  cfg.cavity2 = cfg.cavity1;
  cfg.loop = LoopParams::make(r3, eta3, psi, alpha);
  cfg.backend = backend;
  cfg.validate();
  return cfg;
}

inline constexpr double kResonantPsi = 0.0;
inline constexpr double kNonresonantPsi = std::numbers::pi;

}  // namespace paritysim
