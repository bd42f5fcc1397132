#pragma once

// Loop-reflectivity optimization and the parameter sweeps behind the figure
// curves.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "paritysim/core.hpp"
#include "paritysim/decoherence.hpp"
#include "paritysim/steady_state.hpp"

namespace paritysim {

enum class CouplingCase { Resonant, Nonresonant };

inline std::string to_string(CouplingCase c) {
  return c == CouplingCase::Resonant ? "resonant" : "nonresonant";
}

inline constexpr double kLargestR3 = 1.0 - 1e-9;

struct ClosedFormOptimum {
  double r3 = 0.0;
  bool needs_numeric = false;  // eta3 < 1: the closed form does not apply
};

// Optimum for the phase-only model at eta3 = 1, as a function of Re(F^2).
// Zero outside D/C in [1/sqrt3, sqrt3], i.e. Re(F^2) > -1/2.
inline ClosedFormOptimum r3_opt_nonresonant(double re_F2, double eta3) {
  if (re_F2 < -1.0 - 1e-12 || re_F2 > 1.0 + 1e-12)
    throw ParameterError("Re(F^2) must lie in [-1, 1]");
  ClosedFormOptimum out;
  out.needs_numeric = eta3 < 1.0;
  const double c = std::clamp(re_F2, -1.0, 1.0);
  const double den = 1.0 + 2.0 * c;
  if (den >= -1e-12) return out;  // includes the 0/0 endpoint c = -1/2
  const double r = (std::sqrt(3.0 - 3.0 * c * c) - 2.0 - c) / den;
  out.r3 = std::clamp(r, 0.0, kLargestR3);
  return out;
}

inline double re_F2_nonresonant(double C, double D) {
  const complex F = complex(D, C) / complex(D, -C);
  return (F * F).real();
}

inline double r3_opt_resonant(double C, double eta3) {
  if (!(C > 0.0)) throw ParameterError("C must be positive");
  if (!(eta3 > 0.0) || eta3 > 1.0) throw ParameterError("eta3 must lie in (0, 1]");
  const double G = (1.0 - 2.0 * C) / (1.0 + 2.0 * C);
  return std::sqrt(eta3) * G * G;
}

// ---------------------------------------------------------------------------

struct FeasibleInterval {
  double r_max = kLargestR3;
  bool constrained = false;  // r_max set by a weak-driving constraint, not by r3 < 1
};

// Largest r3 such that |1 - r3 P F1 F2 sqrt(eta3)| >= margin / C_q holds on
// [0, r3] for every state with the driven atom q in |1>.
inline FeasibleInterval feasible_r3_interval(const SystemConfig& cfg, double margin) {
  if (!(margin >= 1.0)) throw ParameterError("constraint margin must be >= 1");
  const ReflectionCoefficients rc = reflection_coefficients(cfg);
  const complex P = cfg.loop.phase_factor();
  const double s = cfg.loop.sqrt_eta3();
  FeasibleInterval out;
  for (int q = 1; q <= 2; ++q) {
    const double C = derived_params(cfg.cavity(q)).C;
    if (!(C > 0.0)) throw ConstraintError("constraint undefined for C = 0");
    const double m = margin / C;
    if (m >= 1.0) throw ConstraintError("no r3 satisfies the weak-driving constraint (margin/C >= 1)");
    for (int partner = 0; partner <= 1; ++partner) {
      const QubitPair st = q == 1 ? QubitPair{1, partner} : QubitPair{partner, 1};
      const complex w = P * (rc.F(1, st.first) * rc.F(2, st.second)) * s;
      // |w|^2 r^2 - 2 Re(w) r + (1 - m^2) = 0, smallest positive root
      const double A = std::norm(w), B = -2.0 * w.real(), Cc = 1.0 - m * m;
      if (A < 1e-300) continue;
      const double disc = B * B - 4.0 * A * Cc;
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      const double r1 = (-B - sq) / (2.0 * A);
      const double r2 = (-B + sq) / (2.0 * A);
      const double root = r1 > 0.0 ? r1 : r2;
      if (root > 0.0 && root < out.r_max) {
        out.r_max = root;
        out.constrained = true;
      }
    }
  }
  return out;
}

// Total odd-subspace exponent (SE in both atoms plus all field losses) per
// measurement, as a function of r3; poles map to +inf.
inline std::function<double(double)> odd_exponent_objective(const SystemConfig& cfg) {
  return [cfg](double r3) {
    try {
      return analyze(cfg.with_r3(r3)).odd_exponent();
    } catch (const SingularityError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const DegenerateMeasurementError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
}

struct NumericOptimum {
  double r3 = 0.0;
  double value = 0.0;
  bool constraint_active = false;
  bool unimodal = true;
  double r_max = kLargestR3;
};

namespace detail {

inline double golden_section(const std::function<double(double)>& fn, double lo, double hi,
                             double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

// Discrete unimodality: non-increasing up to the minimum, non-decreasing after.
inline bool is_unimodal(const std::vector<double>& v, std::size_t imin) {
  for (std::size_t i = 1; i <= imin; ++i)
    if (v[i] > v[i - 1]) return false;
  for (std::size_t i = imin + 1; i < v.size(); ++i)
    if (v[i] < v[i - 1]) return false;
  return true;
}

}  // namespace detail

// Minimizes a scalar objective over r3 in [0, r_max] to absolute tolerance
// 1e-6 in r3. A coarse grid brackets the minimum; if the sampled objective is
// not unimodal the bracket comes from a 1e-3 grid instead.
inline NumericOptimum minimize_scalar_r3(const std::function<double(double)>& objective,
                                         FeasibleInterval interval, double tol = 1e-6) {
  NumericOptimum out;
  out.r_max = interval.r_max;
  const double hi = interval.r_max;
  if (!(hi >= 0.0)) throw ConstraintError("empty feasible interval for r3");
  if (hi == 0.0) {
    out.r3 = 0.0;
    out.value = objective(0.0);
    out.constraint_active = interval.constrained;
    return out;
  }

  constexpr std::size_t kCoarse = 65;
  std::vector<double> grid(kCoarse), vals(kCoarse);
  for (std::size_t i = 0; i < kCoarse; ++i) {
    grid[i] = hi * static_cast<double>(i) / static_cast<double>(kCoarse - 1);
    vals[i] = objective(grid[i]);
  }
  std::size_t imin = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  out.unimodal = detail::is_unimodal(vals, imin);

  double lo_b, hi_b;
  if (out.unimodal) {
    lo_b = grid[imin == 0 ? 0 : imin - 1];
    hi_b = grid[std::min(imin + 1, kCoarse - 1)];
  } else {
    const auto n = static_cast<std::size_t>(std::ceil(hi / 1e-3));
    double best = std::numeric_limits<double>::infinity(), best_r = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double r = std::min(hi, 1e-3 * static_cast<double>(i));
      const double v = objective(r);
      if (v < best) {
        best = v;
        best_r = r;
      }
    }
    lo_b = std::max(0.0, best_r - 1e-3);
    hi_b = std::min(hi, best_r + 1e-3);
  }

  double r = detail::golden_section(objective, lo_b, hi_b, tol);
  double v = objective(r);
  // Endpoints are not visited by golden section.
  for (const double e : {lo_b, hi_b}) {
    const double fe = objective(e);
    if (fe <= v) {
      v = fe;
      r = e;
    }
  }
  out.r3 = r;
  out.value = v;
  out.constraint_active = interval.constrained && hi - r <= tol;
  return out;
}

inline NumericOptimum minimize_r3_numeric(const SystemConfig& cfg, double constraint_margin) {
  return minimize_scalar_r3(odd_exponent_objective(cfg), feasible_r3_interval(cfg, constraint_margin));
}

inline NumericOptimum minimize_r3_numeric(const std::function<double(double)>& objective,
                                          const SystemConfig& cfg, double constraint_margin) {
  return minimize_scalar_r3(objective, feasible_r3_interval(cfg, constraint_margin));
}

// ---------------------------------------------------------------------------

enum class SweepVariable { R3, DOverC, C, Eta3 };

inline std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::R3:
      return "r3";
    case SweepVariable::DOverC:
      return "d_over_c";
    case SweepVariable::C:
      return "C";
    case SweepVariable::Eta3:
      return "eta3";
  }
  return "unknown";
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::R3;
  double lo = 0.0;
  double hi = 0.95;
  int steps = 96;
  CouplingCase coupling = CouplingCase::Nonresonant;
  double C = 100.0;
  double d_over_c = 1.0;
  double r3 = 0.0;
  double eta3 = 1.0;

  void validate() const {
    if (!(lo < hi)) throw ParameterError("sweep range must satisfy lo < hi");
    if (steps < 2) throw ParameterError("sweep needs at least 2 steps");
    if (variable == SweepVariable::R3 && (lo < 0.0 || hi >= 1.0))
      throw ParameterError("r3 sweep range must lie in [0, 1)");
    if (variable == SweepVariable::DOverC && coupling == CouplingCase::Resonant)
      throw ParameterError("D/C is fixed at 0 for resonant coupling");
  }
};

struct SweepRow {
  double value = 0.0;
  // nu_odd,1 t_m C, nu_even,1 t_m C, nu_odd^(L) t_m/(1-eta3), nu_even^(L) t_m/(1-eta3)
  std::array<double, 4> columns{};
  std::string flags;
};

struct SweepTable {
  std::string variable;
  std::vector<SweepRow> rows;

  static constexpr std::array<const char*, 5> kColumnNames{
      "nu_odd_se_tm_C", "nu_even_se_tm_C", "nu_odd_loss_tm", "nu_even_loss_tm", "flags"};
};

inline SweepRow sweep_row(const SweepSpec& spec, double value) {
  double C = spec.C, doc = spec.d_over_c, r3 = spec.r3, eta3 = spec.eta3;
  switch (spec.variable) {
    case SweepVariable::R3:
      r3 = value;
      break;
    case SweepVariable::DOverC:
      doc = value;
      break;
    case SweepVariable::C:
      C = value;
      break;
    case SweepVariable::Eta3:
      eta3 = value;
      break;
  }
  SweepRow row;
  row.value = value;
  try {
    const ClosedFormProducts p = spec.coupling == CouplingCase::Resonant
                                     ? resonant_products(C, r3, eta3)
                                     : nonresonant_products(C, doc * C, r3, eta3);
    row.columns = {p.odd_se1 * C, p.even_se1 * C, p.odd_loss_unit, p.even_loss_unit};
    for (double v : row.columns)
      if (!std::isfinite(v)) throw SingularityError("non-finite sweep value");
    if (p.regime_warning) row.flags = "regime";
    if (p.even_imbalance_per_alpha > 1e-9) row.flags += row.flags.empty() ? "even_imbalance" : ";even_imbalance";
  } catch (const SingularityError&) {
    row.columns.fill(std::numeric_limits<double>::quiet_NaN());
    row.flags = "pole";
  } catch (const DegenerateMeasurementError&) {
    row.columns.fill(std::numeric_limits<double>::quiet_NaN());
    row.flags = "pole";
  }
  return row;
}

inline unsigned sweep_threads() {
  if (const char* env = std::getenv("PARITYSIM_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Rows are evaluated independently and stored in grid order.
inline SweepTable run_sweep(const SweepSpec& spec, unsigned threads = sweep_threads()) {
  spec.validate();
  SweepTable table;
  table.variable = to_string(spec.variable);
  const auto n = static_cast<std::size_t>(spec.steps);
  table.rows.resize(n);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      const double v = spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      table.rows[i] = sweep_row(spec, v);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  return table;
}

}  // namespace paritysim
