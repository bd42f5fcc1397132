#pragma once

// Integrated homodyne photocurrent of a constant coherent field and the
// resulting discrimination statistics.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "paritysim/core.hpp"

namespace paritysim {

struct HomodyneRun {
  complex beta;
  double theta = 0.0;
  double dt = 1e-3;
  int n_steps = 0;
  std::uint64_t seed = 0;
  std::vector<double> dy;

  double integrated() const {
    double y = 0.0;
    for (double v : dy) y += v;
    return y;
  }
};

// Mean photocurrent <<dy>>/dt = -i e^{-i theta} beta + i e^{i theta} beta^* = 2 Im(e^{-i theta} beta).
inline double mean_photocurrent(complex beta, double theta) {
  return 2.0 * (std::polar(1.0, -theta) * beta).imag();
}

// Generator for trajectory `stream` of a run seeded with `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

inline HomodyneRun simulate_record(complex beta, double theta, double dt, int n_steps,
                                   std::uint64_t seed, std::uint64_t stream = 0) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  if (n_steps < 0) throw ParameterError("n_steps must be non-negative");
  HomodyneRun run;
  run.beta = beta;
  run.theta = theta;
  run.dt = dt;
  run.n_steps = n_steps;
  run.seed = seed;
  run.dy.resize(static_cast<std::size_t>(n_steps));
  auto rng = substream(seed, stream);
  std::normal_distribution<double> dW(0.0, std::sqrt(dt));
  const double drift = mean_photocurrent(beta, theta) * dt;
  for (auto& v : run.dy) v = dW(rng) + drift;
  return run;
}

// Time for which the integrated mean currents differ by twice the noise
// standard deviation.
inline double discrimination_time(complex beta1, complex beta2, double theta) {
  const double sep = mean_photocurrent(beta1, theta) - mean_photocurrent(beta2, theta);
  if (std::abs(sep) < 1e-300) throw DegenerateMeasurementError("fields have the same projected quadrature");
  return 4.0 / (sep * sep);
}

struct DiscriminationResult {
  double error_rate = 0.0;
  int n_traj = 0;
  int errors = 0;
  double horizon = 0.0;
  double dt = 0.0;
};

struct DiscriminationOptions {
  double horizon_factor = 1.0;  // integrate over horizon_factor * t_m
  int steps_per_horizon = 1000;
  unsigned threads = 1;
};

// Even trajectories carry beta1, odd ones beta2; each record is integrated
// to the horizon and assigned to the nearer conditional mean.
inline DiscriminationResult discrimination_experiment(complex beta1, complex beta2, double theta,
                                                      int n_traj, std::uint64_t seed,
                                                      DiscriminationOptions opt = {}) {
  if (n_traj < 1000) throw ParameterError("discrimination experiment needs at least 1000 trajectories");
  const double m1 = mean_photocurrent(beta1, theta);
  const double m2 = mean_photocurrent(beta2, theta);
  // Equal fields have no t_m; integrate over unit time so each decision is a coin flip.
  const double tm = m1 != m2 ? discrimination_time(beta1, beta2, theta) : 1.0;
  DiscriminationResult out;
  out.n_traj = n_traj;
  out.horizon = opt.horizon_factor * tm;
  out.dt = out.horizon / opt.steps_per_horizon;
  const double threshold = 0.5 * (m1 + m2) * out.horizon;

  std::vector<char> wrong(static_cast<std::size_t>(n_traj), 0);
  auto work = [&](unsigned begin, unsigned stride) {
    for (auto k = static_cast<std::size_t>(begin); k < wrong.size(); k += stride) {
      const bool first = k % 2 == 0;
      const complex b = first ? beta1 : beta2;
      const double y = simulate_record(b, theta, out.dt, opt.steps_per_horizon, seed, k).integrated();
      bool says_first;
      if (m1 == m2) {
        says_first = y > threshold;
      } else {
        says_first = (m1 > m2) ? y > threshold : y < threshold;
      }
      wrong[k] = says_first != first ? 1 : 0;
    }
  };
  const unsigned threads = std::max(1u, opt.threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  for (char w : wrong) out.errors += w;
  out.error_rate = static_cast<double>(out.errors) / n_traj;
  return out;
}

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace paritysim
