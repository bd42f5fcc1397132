#pragma once

// Truncated-Fock density-matrix integrator for one atom in one field mode.
//
// Full model: atom {|0>, |1>, |e>}, H = g (a s^+ + a^+ s) + Delta s^+ s with
// s = |1><e| and decay Gamma on s. Reduced model: atom {|0>, |1>}, the
// excited level eliminated into a state-dependent phase shift and loss.
// Basis ordering is atom-major: index = atom * N + n.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "paritysim/core.hpp"

namespace paritysim::lindblad {

using Matrix = Eigen::MatrixXcd;
using Sparse = Eigen::SparseMatrix<complex>;

enum class Model { Full, Reduced };

struct LightAtomParams {
  double g = 1.0;
  double Gamma = 1.0;
  double Delta = 0.0;

  static LightAtomParams from_cavity(const CavityQubitParams& c) { return {c.g, c.Gamma, c.Delta}; }

  double detuning_denominator() const { return 0.25 * Gamma * Gamma + Delta * Delta; }
  // Condition for adiabatic elimination: g^2 |<a>|^2 / (Gamma^2/4 + Delta^2).
  double condition_ratio(double field_norm2) const {
    return g * g * field_norm2 / detuning_denominator();
  }
  // Amplitude factor of <a> over time t predicted by the eliminated model (atom in |1>).
  complex reduced_amplitude_factor(double t) const {
    return std::exp(-complex(0.5 * Gamma, -Delta) * (g * g / detuning_denominator()) * t);
  }
};

struct IntegratorConfig {
  int fock_cutoff = 32;
  double step = 0.0;       // 0: 0.1 / (fastest rate)
  int samples = 50;        // observables recorded at this many equally spaced times
  bool auto_double = true; // grow the cutoff when the top Fock level fills
  int max_cutoff = 256;
  double tail_tolerance = 1e-8;

  void validate() const {
    if (fock_cutoff < 4) throw ParameterError("Fock cutoff must be at least 4");
    if (step < 0.0) throw ParameterError("step must be positive");
    if (samples < 1) throw ParameterError("need at least one sample");
  }
};

class DensityMatrix {
 public:
  DensityMatrix(int atom_levels, int cutoff)
      : levels_(atom_levels), cutoff_(cutoff), rho_(Matrix::Zero(atom_levels * cutoff, atom_levels * cutoff)) {}
  DensityMatrix(int atom_levels, int cutoff, Matrix rho)
      : levels_(atom_levels), cutoff_(cutoff), rho_(std::move(rho)) {}

  int atom_levels() const { return levels_; }
  int cutoff() const { return cutoff_; }
  int dim() const { return levels_ * cutoff_; }
  int index(int atom, int n) const { return atom * cutoff_ + n; }

  const Matrix& matrix() const { return rho_; }
  Matrix& matrix() { return rho_; }

  complex trace() const { return rho_.trace(); }
  double purity() const { return (rho_ * rho_).trace().real(); }
  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    const Matrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  double atom_population(int atom) const {
    double p = 0.0;
    for (int n = 0; n < cutoff_; ++n) p += rho_(index(atom, n), index(atom, n)).real();
    return p;
  }
  // <n| tr_atom rho |n>
  double fock_population(int n) const {
    double p = 0.0;
    for (int a = 0; a < levels_; ++a) p += rho_(index(a, n), index(a, n)).real();
    return p;
  }
  complex field_expectation() const {
    complex v{};
    for (int a = 0; a < levels_; ++a)
      for (int n = 0; n + 1 < cutoff_; ++n)
        v += std::sqrt(static_cast<double>(n + 1)) * rho_(index(a, n + 1), index(a, n));
    return v;
  }
  double photon_number() const {
    double v = 0.0;
    for (int n = 0; n < cutoff_; ++n) v += n * fock_population(n);
    return v;
  }

 private:
  int levels_;
  int cutoff_;
  Matrix rho_;
};

// Pure product of an atomic superposition and a coherent field |xi>.
struct ProductState {
  std::vector<complex> atom;  // amplitudes over the atomic levels
  complex field{};

  DensityMatrix density(int cutoff) const {
    const int L = static_cast<int>(atom.size());
    Eigen::VectorXcd fock(cutoff);
    complex c = std::exp(-0.5 * std::norm(field));
    for (int n = 0; n < cutoff; ++n) {
      fock(n) = c;
      c *= field / std::sqrt(static_cast<double>(n + 1));
    }
    fock.normalize();
    Eigen::VectorXcd psi(L * cutoff);
    for (int a = 0; a < L; ++a) psi.segment(a * cutoff, cutoff) = atom[static_cast<std::size_t>(a)] * fock;
    return DensityMatrix(L, cutoff, psi * psi.adjoint());
  }
};

// dρ/dt = -i (K ρ - ρ K^+) + Σ_j L_j ρ L_j^+, K = H - (i/2) Σ L_j^+ L_j.
class Generator {
 public:
  Generator(Sparse H, std::vector<Sparse> jumps) : jumps_(std::move(jumps)) {
    Sparse sum(H.rows(), H.cols());
    for (const auto& L : jumps_) sum += Sparse(L.adjoint()) * L;
    K_ = H - complex(0.0, 0.5) * sum;
    K_adj_ = K_.adjoint();
    for (const auto& L : jumps_) jumps_adj_.emplace_back(L.adjoint());
    rate_ = 0.0;
    for (int k = 0; k < K_.outerSize(); ++k)
      for (Sparse::InnerIterator it(K_, k); it; ++it) rate_ = std::max(rate_, std::abs(it.value()));
  }

  Matrix apply(const Matrix& rho) const {
    Matrix out = complex(0.0, -1.0) * (K_ * rho) + complex(0.0, 1.0) * (rho * K_adj_);
    for (std::size_t j = 0; j < jumps_.size(); ++j) out.noalias() += (jumps_[j] * rho) * jumps_adj_[j];
    return out;
  }

  // Largest matrix element of K; sets the step scale.
  double fastest_rate() const { return rate_; }

 private:
  std::vector<Sparse> jumps_;
  std::vector<Sparse> jumps_adj_;
  Sparse K_;
  Sparse K_adj_;
  double rate_ = 0.0;
};

namespace detail {

inline Sparse fock_annihilation(int N) {
  Sparse a(N, N);
  for (int n = 0; n + 1 < N; ++n) a.insert(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
  a.makeCompressed();
  return a;
}

inline Sparse atom_op(int levels, int row, int col) {
  Sparse s(levels, levels);
  s.insert(row, col) = 1.0;
  return s;
}

// kron(atom, field) with atom-major ordering.
inline Sparse kron(const Sparse& A, const Sparse& B) {
  Sparse out(A.rows() * B.rows(), A.cols() * B.cols());
  std::vector<Eigen::Triplet<complex>> t;
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (Sparse::InnerIterator ia(A, ka); ia; ++ia)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (Sparse::InnerIterator ib(B, kb); ib; ++ib)
          t.emplace_back(static_cast<int>(ia.row() * B.rows() + ib.row()),
                         static_cast<int>(ia.col() * B.cols() + ib.col()), ia.value() * ib.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline Sparse identity(int n) {
  Sparse I(n, n);
  I.setIdentity();
  return I;
}

}  // namespace detail

inline Generator full_generator(const LightAtomParams& p, int cutoff) {
  using namespace detail;
  const Sparse a = kron(identity(3), fock_annihilation(cutoff));
  const Sparse IN = identity(cutoff);
  const Sparse s = kron(atom_op(3, 1, 2), IN);  // |1><e|
  const Sparse sd = s.adjoint();
  const Sparse ad = a.adjoint();
  Sparse H = p.g * (Sparse(a * sd) + Sparse(ad * s)) + p.Delta * Sparse(sd * s);
  std::vector<Sparse> jumps;
  if (p.Gamma > 0.0) jumps.push_back(std::sqrt(p.Gamma) * s);
  return Generator(std::move(H), std::move(jumps));
}

inline Generator reduced_generator(const LightAtomParams& p, int cutoff) {
  using namespace detail;
  const Sparse a = fock_annihilation(cutoff);
  const Sparse n = Sparse(Sparse(a.adjoint()) * a);
  const Sparse P1 = atom_op(2, 1, 1);
  const double den = p.detuning_denominator();
  const double chi = p.Delta * p.g * p.g / den;
  const double gamma = p.Gamma * p.g * p.g / den;
  // dρ/dt = i chi [n P1, ρ]  ->  H = -chi n P1
  Sparse H = -chi * kron(P1, n);
  std::vector<Sparse> jumps;
  if (gamma > 0.0) jumps.push_back(std::sqrt(gamma) * kron(P1, a));
  return Generator(std::move(H), std::move(jumps));
}

inline Generator make_generator(Model model, const LightAtomParams& p, int cutoff) {
  return model == Model::Full ? full_generator(p, cutoff) : reduced_generator(p, cutoff);
}

struct Sample {
  double t = 0.0;
  complex field{};
  std::array<double, 3> populations{};  // |0>, |1>, |e>
  double purity = 1.0;
};

struct Evolution {
  DensityMatrix state;
  std::vector<Sample> samples;
  double step = 0.0;
  int cutoff = 0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double max_tail_population = 0.0;
  double max_excited_population = 0.0;
};

inline Matrix rk4_step(const Generator& G, const Matrix& rho, double h) {
  const Matrix k1 = G.apply(rho);
  const Matrix k2 = G.apply(rho + (0.5 * h) * k1);
  const Matrix k3 = G.apply(rho + (0.5 * h) * k2);
  const Matrix k4 = G.apply(rho + h * k3);
  return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Sample observe(const DensityMatrix& d, double t) {
  Sample s;
  s.t = t;
  s.field = d.field_expectation();
  for (int a = 0; a < d.atom_levels(); ++a) s.populations[static_cast<std::size_t>(a)] = d.atom_population(a);
  s.purity = d.purity();
  return s;
}

// Fixed-step RK4 from rho0 over [0, t_end]. Throws CutoffError when the top
// Fock level population exceeds the tolerance, IntegrationError when the
// state leaves the physical set.
inline Evolution evolve(const DensityMatrix& rho0, Model model, const LightAtomParams& p,
                        double t_end, const IntegratorConfig& cfg = {}) {
  cfg.validate();
  if (!(t_end >= 0.0)) throw ParameterError("t_end must be non-negative");
  const int levels = model == Model::Full ? 3 : 2;
  if (rho0.atom_levels() != levels) throw ParameterError("initial state has the wrong atomic dimension");
  const Generator G = make_generator(model, p, rho0.cutoff());

  const double h_target = cfg.step > 0.0 ? cfg.step : 0.1 / std::max(G.fastest_rate(), 1e-12);
  const long per_sample = std::max(1L, static_cast<long>(std::ceil(t_end / cfg.samples / h_target)));
  const long total = per_sample * cfg.samples;
  const double h = t_end > 0.0 ? t_end / static_cast<double>(total) : 0.0;

  Evolution ev{rho0, {}, h, rho0.cutoff()};
  auto check = [&](const DensityMatrix& d, double t) {
    const double tr_err = std::abs(d.trace() - 1.0);
    const double herm = d.hermiticity_error();
    const double tail = d.fock_population(d.cutoff() - 1);
    ev.max_trace_error = std::max(ev.max_trace_error, tr_err);
    ev.max_hermiticity_error = std::max(ev.max_hermiticity_error, herm);
    ev.max_tail_population = std::max(ev.max_tail_population, tail);
    if (levels == 3) ev.max_excited_population = std::max(ev.max_excited_population, d.atom_population(2));
    if (tail > cfg.tail_tolerance)
      throw CutoffError("Fock cutoff " + std::to_string(d.cutoff()) + " overflows at t = " + std::to_string(t));
    if (tr_err > 1e-9 * std::max(1.0, t) || herm > 1e-10)
      throw IntegrationError("density matrix lost trace or hermiticity at t = " + std::to_string(t));
    ev.samples.push_back(observe(d, t));
  };

  check(ev.state, 0.0);
  ev.min_eigenvalue = ev.state.min_eigenvalue();
  Matrix rho = rho0.matrix();
  for (int k = 1; k <= cfg.samples && t_end > 0.0; ++k) {
    for (long i = 0; i < per_sample; ++i) rho = rk4_step(G, rho, h);
    ev.state = DensityMatrix(levels, rho0.cutoff(), rho);
    check(ev.state, h * static_cast<double>(per_sample * k));
    ev.min_eigenvalue = std::min(ev.min_eigenvalue, ev.state.min_eigenvalue());
  }
  if (ev.min_eigenvalue < -1e-8) throw IntegrationError("density matrix lost positivity");
  return ev;
}

// Starts from a product state and doubles the cutoff on overflow.
inline Evolution evolve(const ProductState& init, Model model, const LightAtomParams& p, double t_end,
                        IntegratorConfig cfg = {}) {
  for (;;) {
    try {
      return evolve(init.density(cfg.fock_cutoff), model, p, t_end, cfg);
    } catch (const CutoffError&) {
      if (!cfg.auto_double || 2 * cfg.fock_cutoff > cfg.max_cutoff) throw;
      cfg.fock_cutoff *= 2;
    }
  }
}

inline Evolution evolve_full(const ProductState& init, const LightAtomParams& p, double t_end,
                             const IntegratorConfig& cfg = {}) {
  if (init.atom.size() != 3) throw ParameterError("full model needs three atomic amplitudes");
  return evolve(init, Model::Full, p, t_end, cfg);
}

inline Evolution evolve_reduced(const ProductState& init, const LightAtomParams& p, double t_end,
                                const IntegratorConfig& cfg = {}) {
  if (init.atom.size() != 2) throw ParameterError("reduced model needs two atomic amplitudes");
  return evolve(init, Model::Reduced, p, t_end, cfg);
}

struct EliminationReport {
  double condition_ratio = 0.0;
  double max_field_deviation = 0.0;       // max_t |<a>_full - <a>_red| / |<a>_red|
  double max_population_deviation = 0.0;  // |0> and (|1> + |e>) vs reduced |0>, |1>
  double max_purity_deviation = 0.0;
  double max_excited_population = 0.0;
  int cutoff = 0;
  double step = 0.0;
};

// Runs both models from the same coherent field with the atom in
// c0|0> + c1|1> and compares their observables sample by sample.
inline EliminationReport compare_elimination(const LightAtomParams& p, complex xi0, double t_end,
                                             const IntegratorConfig& cfg = {},
                                             complex c0 = 0.0, complex c1 = 1.0) {
  const ProductState full_init{{c0, c1, 0.0}, xi0};
  const ProductState red_init{{c0, c1}, xi0};
  const Evolution full = evolve(full_init, Model::Full, p, t_end, cfg);
  IntegratorConfig red_cfg = cfg;
  red_cfg.fock_cutoff = full.cutoff;
  red_cfg.step = full.step;
  const Evolution red = evolve(red_init, Model::Reduced, p, t_end, red_cfg);

  EliminationReport rep;
  rep.condition_ratio = p.condition_ratio(std::norm(xi0));
  rep.max_excited_population = full.max_excited_population;
  rep.cutoff = full.cutoff;
  rep.step = full.step;
  const std::size_t n = std::min(full.samples.size(), red.samples.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto& f = full.samples[k];
    const auto& r = red.samples[k];
    const double ref = std::abs(r.field);
    if (ref > 0.0) rep.max_field_deviation = std::max(rep.max_field_deviation, std::abs(f.field - r.field) / ref);
    rep.max_population_deviation = std::max(
        {rep.max_population_deviation, std::abs(f.populations[0] - r.populations[0]),
         std::abs(f.populations[1] + f.populations[2] - r.populations[1])});
    rep.max_purity_deviation = std::max(rep.max_purity_deviation, std::abs(f.purity - r.purity));
  }
  return rep;
}

// Parameters on the elimination scaling path g -> k g, Gamma -> k^2 Gamma,
// Delta -> k^2 Delta; the reduced dynamics is invariant along it.
inline LightAtomParams scaled(const LightAtomParams& base, double k) {
  return {k * base.g, k * k * base.Gamma, k * k * base.Delta};
}

}  // namespace paritysim::lindblad
