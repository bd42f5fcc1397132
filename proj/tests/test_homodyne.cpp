#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "paritysim/decoherence.hpp"
#include "paritysim/homodyne.hpp"

using namespace paritysim;

TEST(Homodyne, MeanCurrent) {
  EXPECT_DOUBLE_EQ(mean_photocurrent(complex(0.0, 1.0), 0.0), 2.0);
  EXPECT_DOUBLE_EQ(mean_photocurrent(complex(3.0, 0.0), 0.0), 0.0);
  EXPECT_NEAR(mean_photocurrent(complex(1.0, 0.0), -std::numbers::pi / 2), 2.0, 1e-15);
}

TEST(Homodyne, PhaseCovariance) {
  const complex b(0.7, -0.3);
  for (double phi : {0.1, 1.0, 2.5, -3.0})
    for (double th : {0.0, 0.4, 2.0})
      EXPECT_NEAR(mean_photocurrent(b * std::polar(1.0, phi), th + phi), mean_photocurrent(b, th), 1e-14);
}

TEST(Homodyne, RecordStatistics) {
  const complex beta(0.2, 0.6);
  const double dt = 1e-3;
  const auto run = simulate_record(beta, 0.3, dt, 200000, 7);
  const double n = static_cast<double>(run.dy.size());
  const double mean = std::accumulate(run.dy.begin(), run.dy.end(), 0.0) / n;
  double var = 0.0;
  for (double v : run.dy) var += (v - mean) * (v - mean);
  var /= n - 1.0;
  const double expect = mean_photocurrent(beta, 0.3) * dt;
  EXPECT_NEAR(mean, expect, 5.0 * std::sqrt(dt / n));
  EXPECT_NEAR(var / dt, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Homodyne, Determinism) {
  const auto a = simulate_record(complex(0.0, 1.0), 0.0, 1e-2, 100, 42, 3);
  const auto b = simulate_record(complex(0.0, 1.0), 0.0, 1e-2, 100, 42, 3);
  EXPECT_EQ(a.dy, b.dy);
  const auto c = simulate_record(complex(0.0, 1.0), 0.0, 1e-2, 100, 42, 4);
  EXPECT_NE(a.dy, c.dy);
  const auto d = simulate_record(complex(0.0, 1.0), 0.0, 1e-2, 100, 43, 3);
  EXPECT_NE(a.dy, d.dy);
}

TEST(Homodyne, StreamsAreUncorrelated) {
  const int n = 50000;
  const auto a = simulate_record(0.0, 0.0, 1.0, n, 9, 0);
  const auto b = simulate_record(0.0, 0.0, 1.0, n, 9, 1);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int i = 0; i < n; ++i) {
    sab += a.dy[i] * b.dy[i];
    saa += a.dy[i] * a.dy[i];
    sbb += b.dy[i] * b.dy[i];
  }
  EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 0.05);
}

TEST(Homodyne, Preconditions) {
  EXPECT_THROW(simulate_record(0.0, 0.0, 0.0, 10, 1), ParameterError);
  EXPECT_THROW(simulate_record(0.0, 0.0, 1.0, -1, 1), ParameterError);
  EXPECT_THROW(discrimination_time(complex(1.0, 0.0), complex(2.0, 0.0), 0.0), DegenerateMeasurementError);
  EXPECT_THROW(discrimination_experiment(0.0, complex(0.0, 1.0), 0.0, 999, 1), ParameterError);
}

TEST(Discrimination, TimeExamples) {
  EXPECT_DOUBLE_EQ(discrimination_time(complex(0.0, 1.0), complex(0.0, -1.0), 0.0), 0.25);
  EXPECT_DOUBLE_EQ(discrimination_time(complex(0.0, 0.5), 0.0, 0.0), 4.0);
  EXPECT_NEAR(discrimination_time(complex(1.0, 0.0), complex(-1.0, 0.0), -std::numbers::pi / 2), 0.25, 1e-15);
}

TEST(Discrimination, MatchesMeasurementTime) {
  const auto cfg = make_symmetric_config(100.0, 100.0, 0.3, 1.0, kNonresonantPsi, 0.7);
  const auto amps = solve_loop(cfg);
  const auto tm = measurement_time(amps);
  EXPECT_NEAR(discrimination_time(amps.at(1, 0).beta, amps.at(0, 0).beta, 0.0), tm.t00, 1e-12 * tm.t00);
}

TEST(Discrimination, ErrorRateAtMeasurementTime) {
  for (double f : {1.0, 4.0}) {
    DiscriminationOptions opt;
    opt.horizon_factor = f;
    opt.steps_per_horizon = 200;
    const auto res = discrimination_experiment(complex(0.0, 0.8), complex(0.0, -0.3), 0.0, 10000, 5, opt);
    const double p = normal_cdf(-std::sqrt(f));
    EXPECT_NEAR(res.error_rate, p, 4.0 * std::sqrt(p * (1 - p) / 10000.0));
    EXPECT_NEAR(res.horizon, f * discrimination_time(complex(0.0, 0.8), complex(0.0, -0.3), 0.0), 1e-12);
  }
}

TEST(Discrimination, IdenticalFieldsGiveCoinFlip) {
  DiscriminationOptions opt;
  opt.steps_per_horizon = 50;
  const auto res = discrimination_experiment(complex(0.3, 0.3), complex(0.3, 0.3), 0.0, 4000, 11, opt);
  EXPECT_NEAR(res.error_rate, 0.5, 0.04);
}

TEST(Discrimination, ThreadCountDoesNotChangeResult) {
  DiscriminationOptions one, many;
  one.steps_per_horizon = many.steps_per_horizon = 100;
  many.threads = 4;
  const auto a = discrimination_experiment(complex(0.0, 1.0), 0.0, 0.0, 2000, 3, one);
  const auto b = discrimination_experiment(complex(0.0, 1.0), 0.0, 0.0, 2000, 3, many);
  EXPECT_EQ(a.errors, b.errors);
}

TEST(Discrimination, NormalCdf) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(-1.0), 0.158655253931457, 1e-14);
}
