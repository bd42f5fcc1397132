#pragma once

// Time-domain response of the loop on a grid of one sample per cavity round
// trip. Two independent propagators are provided: a closed-form path sum over
// round-trip counts, and a literal hop-by-hop simulation of the mirrors.

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "paritysim/core.hpp"
#include "paritysim/steady_state.hpp"

namespace paritysim {

// Everything the time-domain propagators need: per-cavity round-trip
// factors and coupler amplitudes plus the loop constants.
struct LoopNetwork {
  std::array<std::array<complex, 2>, 2> f{};  // [q - 1][atom state]
  std::array<double, 2> r{};
  std::array<double, 2> t{};
  double r3 = 0.0;
  double t3 = 1.0;
  double sqrt_eta3 = 1.0;
  complex P{1.0, 0.0};
  double tau = 1.0;
  int loop_delay_steps = 1;  // return-path delay from cavity 2 to the beam splitter, in round trips

  static LoopNetwork from_config(const SystemConfig& cfg, int loop_delay_steps = 1);

  complex factor(int q, int atom_state) const {
    return f[static_cast<std::size_t>(q - 1)][static_cast<std::size_t>(atom_state)];
  }
};

inline LoopNetwork LoopNetwork::from_config(const SystemConfig& cfg, int loop_delay_steps) {
  cfg.validate();
  const double t1 = cfg.cavity1.tau;
  const double t2 = cfg.cavity2.tau;
  if (std::abs(t1 - t2) > 1e-12 * std::max(t1, t2))
    throw ConfigurationError("transient propagation requires equal round-trip times");
  if (loop_delay_steps < 1) throw ConfigurationError("loop delay must be at least one round trip");
  LoopNetwork net;
  for (int q = 1; q <= 2; ++q) {
    const auto& c = cfg.cavity(q);
    for (int i = 0; i <= 1; ++i)
      net.f[static_cast<std::size_t>(q - 1)][static_cast<std::size_t>(i)] = round_trip_factor(c, i);
    net.r[static_cast<std::size_t>(q - 1)] = c.r_mirror;
    net.t[static_cast<std::size_t>(q - 1)] = c.t_mirror;
  }
  net.r3 = cfg.loop.r3;
  net.t3 = cfg.loop.t3;
  net.sqrt_eta3 = cfg.loop.sqrt_eta3();
  net.P = cfg.loop.phase_factor();
  net.tau = t1;
  net.loop_delay_steps = loop_delay_steps;
  return net;
}

// Steady-state reflection coefficients implied by the network's round-trip factors.
inline ReflectionCoefficients network_reflection(const LoopNetwork& net) {
  ReflectionCoefficients rc;
  rc.backend = Backend::ExactMirrorAlgebra;
  for (int q = 1; q <= 2; ++q)
    for (int i = 0; i <= 1; ++i) {
      const double r = net.r[static_cast<std::size_t>(q - 1)];
      const double t = net.t[static_cast<std::size_t>(q - 1)];
      auto& resp = rc.response(q, i);
      resp.f = net.factor(q, i);
      resp.F = reflection_from_round_trip(resp.f, r);
      resp.intracavity_gain = t / (1.0 - r * resp.f);
      resp.se_coefficient = 0.0;
    }
  return rc;
}

// Impulse response from zeta2 at cavity 1 to zeta5 after cavity 2:
// zeta5(n) = sum_{q<n} kernel[n - q] zeta2(q) + direct * zeta2(n).
class RecursionKernel {
 public:
  RecursionKernel(const LoopNetwork& net, QubitPair state, int max_lag) {
    const complex f1 = net.factor(1, state.first);
    const complex f2 = net.factor(2, state.second);
    const double r1 = net.r[0], r2 = net.r[1];
    const double t1sq = net.t[0] * net.t[0], t2sq = net.t[1] * net.t[1];
    const double s = net.sqrt_eta3;
    const complex a = r1 * f1;
    const complex b = r2 * f2;
    direct_ = -kI * s * (r1 * r2);

    const auto n = static_cast<std::size_t>(std::max(max_lag, 0)) + 1;
    kernel_.assign(n, complex{});
    // Powers a^m, b^m and the symmetric double sum h(m) = sum_k a^k b^(m-2-k).
    complex pa{1.0, 0.0}, pb{1.0, 0.0};
    complex hab{}, hba{};
    const complex c1 = kI * s * t1sq * r2;
    const complex c2 = kI * s * t2sq * r1;
    const complex c12 = -kI * s * (t1sq * t2sq) * (f1 * f2);
    for (std::size_t m = 1; m < n; ++m) {
      // here pa = a^(m-1), pb = b^(m-1); hab, hba hold h(m)
      const complex h = 0.5 * (hab + hba);
      kernel_[m] = (c1 * f1 * pa + c2 * f2 * pb) + c12 * h;
      hab = a * hab + pb;
      hba = b * hba + pa;
      pa *= a;
      pb *= b;
    }
  }

  complex direct() const { return direct_; }
  complex lag(int m) const { return kernel_.at(static_cast<std::size_t>(m)); }
  int max_lag() const { return static_cast<int>(kernel_.size()) - 1; }

 private:
  std::vector<complex> kernel_;
  complex direct_;
};

inline complex recursion_step(std::span<const complex> zeta2_history, int n,
                              const RecursionKernel& kernel) {
  if (n < 0 || static_cast<std::size_t>(n) >= zeta2_history.size())
    throw ParameterError("history must cover indices 0..n");
  if (n > kernel.max_lag()) throw ParameterError("kernel shorter than requested step");
  complex acc{};
  for (int q = 0; q < n; ++q) acc += kernel.lag(n - q) * zeta2_history[static_cast<std::size_t>(q)];
  return acc + kernel.direct() * zeta2_history[static_cast<std::size_t>(n)];
}

inline complex recursion_step(std::span<const complex> zeta2_history, int n,
                              const LoopNetwork& net, QubitPair state) {
  return recursion_step(zeta2_history, n, RecursionKernel(net, state, n));
}

// Literal evaluation of the four-term path sum, O(n^2) per step.
inline complex recursion_step_direct(std::span<const complex> zeta2_history, int n,
                                     const LoopNetwork& net, QubitPair state) {
  if (n < 0 || static_cast<std::size_t>(n) >= zeta2_history.size())
    throw ParameterError("history must cover indices 0..n");
  const complex f1 = net.factor(1, state.first);
  const complex f2 = net.factor(2, state.second);
  const double r1 = net.r[0], r2 = net.r[1], t1 = net.t[0], t2 = net.t[1];
  const double s = net.sqrt_eta3;
  const complex a = r1 * f1, b = r2 * f2;
  complex total{};
  for (int q = 0; q < n; ++q) {
    const int m = n - q;
    complex coeff = kI * t1 * t1 * r2 * f1 * s * std::pow(a, m - 1) +
                    kI * r1 * t2 * t2 * f2 * s * std::pow(b, m - 1);
    complex inner{};
    for (int k = 0; k <= m - 2; ++k) inner += std::pow(a, k) * std::pow(b, m - k - 2);
    coeff -= kI * t1 * t1 * t2 * t2 * f1 * f2 * s * inner;
    total += coeff * zeta2_history[static_cast<std::size_t>(q)];
  }
  return total - kI * r1 * r2 * s * zeta2_history[static_cast<std::size_t>(n)];
}

struct StateTrace {
  std::vector<complex> zeta2;
  std::vector<complex> zeta5;
  std::vector<complex> beta;
};

struct TransientTrace {
  double tau = 1.0;
  int loop_delay_steps = 1;
  std::vector<complex> alpha;
  std::array<StateTrace, 4> states;

  const StateTrace& at(QubitPair s) const { return states[static_cast<std::size_t>(s.index())]; }
  std::size_t size() const { return alpha.size(); }
};

namespace detail {

inline std::vector<complex> input_samples(std::span<const complex> alpha, int n_steps) {
  if (n_steps < 1) throw ParameterError("n_steps must be at least 1");
  if (alpha.size() < static_cast<std::size_t>(n_steps))
    throw ParameterError("input envelope shorter than n_steps");
  return {alpha.begin(), alpha.begin() + n_steps};
}

inline complex delayed(const std::vector<complex>& v, int n, int delay) {
  return n - delay >= 0 ? v[static_cast<std::size_t>(n - delay)] : complex{};
}

}  // namespace detail

// Closes the loop around the path-sum recursion: zeta2(n) = P (t3 alpha(n) + i r3 zeta5(n - L)).
inline TransientTrace propagate_closed_loop(const LoopNetwork& net, std::span<const complex> alpha,
                                            int n_steps) {
  TransientTrace trace;
  trace.tau = net.tau;
  trace.loop_delay_steps = net.loop_delay_steps;
  trace.alpha = detail::input_samples(alpha, n_steps);
  const int L = net.loop_delay_steps;
  for (const QubitPair s : kAllPairs) {
    const RecursionKernel kernel(net, s, n_steps);
    StateTrace& st = trace.states[static_cast<std::size_t>(s.index())];
    st.zeta2.assign(static_cast<std::size_t>(n_steps), complex{});
    st.zeta5.assign(static_cast<std::size_t>(n_steps), complex{});
    st.beta.assign(static_cast<std::size_t>(n_steps), complex{});
    for (int n = 0; n < n_steps; ++n) {
      const auto k = static_cast<std::size_t>(n);
      const complex returning = detail::delayed(st.zeta5, n, L);
      st.zeta2[k] = net.P * (net.t3 * trace.alpha[k] + kI * net.r3 * returning);
      st.zeta5[k] = recursion_step(std::span<const complex>(st.zeta2).first(k + 1), n, kernel);
      st.beta[k] = net.t3 * returning + kI * net.r3 * trace.alpha[k];
    }
  }
  return trace;
}

inline TransientTrace propagate_closed_loop(const SystemConfig& cfg, std::span<const complex> alpha,
                                            int n_steps) {
  return propagate_closed_loop(LoopNetwork::from_config(cfg), alpha, n_steps);
}

// Hop-by-hop simulation: each cavity keeps the field just injected past its
// coupler; per step it returns after one round trip multiplied by f.
// Coupler: inside = t in + r returning, out = i r in - i t returning.
inline TransientTrace propagate_naive_network(const LoopNetwork& net,
                                              std::span<const complex> alpha, int n_steps) {
  TransientTrace trace;
  trace.tau = net.tau;
  trace.loop_delay_steps = net.loop_delay_steps;
  trace.alpha = detail::input_samples(alpha, n_steps);
  const int L = net.loop_delay_steps;
  const double r1 = net.r[0], r2 = net.r[1], t1 = net.t[0], t2 = net.t[1];
  for (const QubitPair s : kAllPairs) {
    const complex f1 = net.factor(1, s.first);
    const complex f2 = net.factor(2, s.second);
    StateTrace& st = trace.states[static_cast<std::size_t>(s.index())];
    st.zeta2.assign(static_cast<std::size_t>(n_steps), complex{});
    st.zeta5.assign(static_cast<std::size_t>(n_steps), complex{});
    st.beta.assign(static_cast<std::size_t>(n_steps), complex{});
    complex inside1{}, inside2{};
    for (int n = 0; n < n_steps; ++n) {
      const auto k = static_cast<std::size_t>(n);
      const complex returning = detail::delayed(st.zeta5, n, L);
      const complex zeta1 = net.t3 * trace.alpha[k] + kI * net.r3 * returning;
      st.zeta2[k] = net.P * zeta1;

      const complex back1 = f1 * inside1;
      const complex zeta3 = kI * r1 * st.zeta2[k] - kI * t1 * back1;
      inside1 = t1 * st.zeta2[k] + r1 * back1;

      const complex zeta4 = kI * net.sqrt_eta3 * zeta3;

      const complex back2 = f2 * inside2;
      st.zeta5[k] = kI * r2 * zeta4 - kI * t2 * back2;
      inside2 = t2 * zeta4 + r2 * back2;

      st.beta[k] = net.t3 * returning + kI * net.r3 * trace.alpha[k];
    }
  }
  return trace;
}

inline TransientTrace propagate_naive_network(const SystemConfig& cfg,
                                              std::span<const complex> alpha, int n_steps) {
  return propagate_naive_network(LoopNetwork::from_config(cfg), alpha, n_steps);
}

inline std::vector<complex> step_input(complex alpha0, int n_steps) {
  return std::vector<complex>(static_cast<std::size_t>(std::max(n_steps, 0)), alpha0);
}

}  // namespace paritysim
