#pragma once

// Round-trip factors, cavity reflection coefficients and the steady-state
// solution of the closed loop for all four two-qubit basis states.

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "paritysim/core.hpp"

namespace paritysim {

// Two-qubit computational basis label |i1 i2>.
struct QubitPair {
  int first = 0;
  int second = 0;

  constexpr int index() const { return 2 * first + second; }
  constexpr int state_of(int q) const { return q == 1 ? first : second; }
  std::string label() const { return std::to_string(first) + std::to_string(second); }

  friend constexpr bool operator==(QubitPair, QubitPair) = default;
};

inline constexpr std::array<QubitPair, 4> kAllPairs{
    QubitPair{0, 0}, QubitPair{0, 1}, QubitPair{1, 0}, QubitPair{1, 1}};

// Response of one cavity seen from the outside for a given atom state.
struct CavityResponse {
  complex F;                // reflection coefficient: outgoing = -i F * incoming
  complex f;                // round-trip factor (exact backend), 0 otherwise
  complex intracavity_gain; // xi = gain * incoming flux amplitude
  double se_coefficient;    // spontaneous-emission rate per intracavity photon
};

struct ReflectionCoefficients {
  std::array<std::array<CavityResponse, 2>, 2> responses{};  // [q - 1][atom state]
  Backend backend = Backend::HighFinesseFirstOrder;

  const CavityResponse& response(int q, int atom_state) const {
    return responses.at(static_cast<std::size_t>(q - 1)).at(static_cast<std::size_t>(atom_state));
  }
  CavityResponse& response(int q, int atom_state) {
    return responses.at(static_cast<std::size_t>(q - 1)).at(static_cast<std::size_t>(atom_state));
  }
  complex F(int q, int atom_state) const { return response(q, atom_state).F; }
  complex f(int q, int atom_state) const { return response(q, atom_state).f; }
};

// Field amplitudes for one two-qubit state. zeta[k - 1] is zeta_k.
struct StateAmplitudes {
  std::array<complex, 5> zeta{};
  complex xi1{};
  complex xi2{};
  complex beta{};

  complex xi(int q) const { return q == 1 ? xi1 : xi2; }
};

struct ConditionalAmplitudes {
  std::array<StateAmplitudes, 4> states{};
  ReflectionCoefficients coefficients;
  LoopParams loop;
  std::array<double, 2> tau{1.0, 1.0};

  const StateAmplitudes& at(QubitPair s) const {
    return states[static_cast<std::size_t>(s.index())];
  }
  const StateAmplitudes& at(int i1, int i2) const { return at(QubitPair{i1, i2}); }
  Backend backend() const { return coefficients.backend; }
};

// ---------------------------------------------------------------------------

namespace detail {

inline void require_atom_state(int atom_state) {
  if (atom_state != 0 && atom_state != 1) throw ParameterError("atom state must be 0 or 1");
}

}  // namespace detail

// Factor acquired by the intracavity field per round trip. Intracavity loss
// enters as one multiplicative sqrt(eta_cav).
inline complex round_trip_factor(const CavityQubitParams& c, int atom_state) {
  detail::require_atom_state(atom_state);
  const double coupled = atom_state == 1 ? 1.0 : 0.0;
  const double denom = 0.25 * c.Gamma * c.Gamma + c.Delta * c.Delta;
  const complex exponent =
      -complex(0.5 * c.Gamma, -c.Delta) * (c.g * c.g * coupled / denom) * c.tau -
      kI * (c.delta_cav * c.tau);
  return std::sqrt(c.eta_cav) * std::exp(exponent);
}

// Mobius map of the round-trip factor through the input coupler.
inline complex reflection_from_round_trip(complex f, double r) {
  const complex den = 1.0 - r * f;
  if (std::abs(den) < 1e-15) throw SingularityError("cavity denominator 1 - r f vanishes");
  return (f - r) / den;
}

inline complex reflection_coefficient_exact(const CavityQubitParams& c, int atom_state) {
  return reflection_from_round_trip(round_trip_factor(c, atom_state), c.r_mirror);
}

namespace detail {

// Scaled first-order round-trip deficit x' with F = (1 - x')/(1 + x').
// loss = (1 - eta_cav)/(kappa tau) is the intracavity survival deficit per t^2.
inline complex first_order_deficit(double C, double D, int atom_state, double loss) {
  const double k = atom_state == 1 ? 1.0 : 0.0;
  return complex(2.0 * C * k, -2.0 * C * D * (k - 0.5)) / (1.0 + D * D) + loss;
}

}  // namespace detail

inline complex reflection_coefficient_expanded(double C, double D, int atom_state,
                                               double loss = 0.0) {
  detail::require_atom_state(atom_state);
  const complex x = detail::first_order_deficit(C, D, atom_state, loss);
  return (1.0 - x) / (1.0 + x);
}

// Phase-only approximation for D ~ C >> 1.
inline complex reflection_coefficient_nonresonant(double C, double D, int atom_state) {
  detail::require_atom_state(atom_state);
  const complex F1 = complex(D, C) / complex(D, -C);
  return atom_state == 1 ? F1 : std::conj(F1);
}

inline CavityResponse cavity_response(const CavityQubitParams& c, int atom_state,
                                      Backend backend) {
  detail::require_atom_state(atom_state);
  const auto [C, D] = derived_params(c);
  const double sqrt_kt = std::sqrt(c.kappa * c.tau);
  CavityResponse out{};
  switch (backend) {
    case Backend::ExactMirrorAlgebra: {
      out.f = round_trip_factor(c, atom_state);
      const complex den = 1.0 - c.r_mirror * out.f;
      if (std::abs(den) < 1e-15) throw SingularityError("cavity denominator 1 - r f vanishes");
      out.F = (out.f - c.r_mirror) / den;
      out.intracavity_gain = c.t_mirror / den;
      out.se_coefficient = 2.0 * C * c.kappa / (1.0 + D * D);
      break;
    }
    case Backend::HighFinesseFirstOrder: {
      const double loss = (1.0 - c.eta_cav) / (c.kappa * c.tau);
      const complex x = detail::first_order_deficit(C, D, atom_state, loss);
      out.F = (1.0 - x) / (1.0 + x);
      out.intracavity_gain = 2.0 / ((1.0 + x) * sqrt_kt);
      out.se_coefficient = 2.0 * C * c.kappa / (1.0 + D * D);
      break;
    }
    case Backend::NonresonantAsymptotic: {
      if (D == 0.0) throw ParameterError("nonresonant asymptotic backend needs D != 0");
      out.F = reflection_coefficient_nonresonant(C, D, atom_state);
      out.intracavity_gain = (1.0 + out.F) / sqrt_kt;
      out.se_coefficient = 2.0 * C * c.kappa / (D * D);
      break;
    }
  }
  return out;
}

inline ReflectionCoefficients reflection_coefficients(const SystemConfig& cfg) {
  ReflectionCoefficients rc;
  rc.backend = cfg.backend;
  for (int q = 1; q <= 2; ++q)
    for (int i = 0; i <= 1; ++i) rc.response(q, i) = cavity_response(cfg.cavity(q), i, cfg.backend);
  return rc;
}

// Loop denominator 1 - r3 P F1 F2 sqrt(eta3) for one basis state.
inline complex loop_denominator(const ReflectionCoefficients& rc, const LoopParams& loop,
                                QubitPair s) {
  const complex w = loop.phase_factor() * (rc.F(1, s.first) * rc.F(2, s.second)) * loop.sqrt_eta3();
  return 1.0 - loop.r3 * w;
}

// Solves the loop given the cavity responses.
inline ConditionalAmplitudes solve_loop(const ReflectionCoefficients& rc, const LoopParams& loop,
                                        std::array<double, 2> tau) {
  loop.validate();
  ConditionalAmplitudes out;
  out.coefficients = rc;
  out.loop = loop;
  out.tau = tau;
  const complex P = loop.phase_factor();
  const double s = loop.sqrt_eta3();
  for (const QubitPair st : kAllPairs) {
    const complex F1 = rc.F(1, st.first);
    const complex F2 = rc.F(2, st.second);
    const complex w = P * (F1 * F2) * s;
    const complex den = 1.0 - loop.r3 * w;
    if (std::abs(den) < 1e-15)
      throw SingularityError("loop denominator vanishes for state |" + st.label() + ">");
    StateAmplitudes& a = out.states[static_cast<std::size_t>(st.index())];
    a.zeta[0] = loop.t3 * loop.alpha / den;
    a.zeta[1] = P * a.zeta[0];
    a.zeta[2] = -kI * F1 * a.zeta[1];
    a.zeta[3] = kI * s * a.zeta[2];
    a.zeta[4] = -kI * F2 * a.zeta[3];
    a.beta = kI * (loop.r3 - w) / den * loop.alpha;
    a.xi1 = rc.response(1, st.first).intracavity_gain * a.zeta[1];
    a.xi2 = rc.response(2, st.second).intracavity_gain * a.zeta[3];
  }
  return out;
}

inline ConditionalAmplitudes solve_loop(const SystemConfig& cfg) {
  cfg.validate();
  return solve_loop(reflection_coefficients(cfg), cfg.loop, {cfg.cavity1.tau, cfg.cavity2.tau});
}

// Expected photon number |xi_q|^2 tau_q in cavity q for state |i1 i2>.
inline double conditional_cavity_photon_number(const ConditionalAmplitudes& amps, int q, int i1,
                                               int i2) {
  if (q != 1 && q != 2) throw ParameterError("cavity index must be 1 or 2");
  return std::norm(amps.at(i1, i2).xi(q)) * amps.tau[static_cast<std::size_t>(q - 1)];
}

}  // namespace paritysim
