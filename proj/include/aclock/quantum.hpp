#pragma once

#include "aclock/estimation.hpp"
#include "aclock/rng.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

/// Quantum reference families rho(phi), POVM measurements, the symmetric
/// logarithmic derivative (SLD) Fisher information and the classical Fisher
/// information induced by a measurement.
namespace aclock::quantum {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// rho(phi) = exp(-i phi rate H) rho0 exp(+i phi rate H).
struct Generator {
  CMatrix hamiltonian;
  CMatrix initial;
  double rate = 1.0;
};

/// A finite-dimensional family of density matrices indexed by phi.
class QuantumFamily {
public:
  using StateFn = std::function<CMatrix(double)>;

  /// `derivative` may be empty, in which case d rho / d phi is a central
  /// difference with step 1e-5.
  QuantumFamily(StateFn state, StateFn derivative = {});

  static QuantumFamily hamiltonian(const CMatrix& H, const CMatrix& rho0, double rate = 1.0);

  [[nodiscard]] CMatrix state(double phi) const { return state_(phi); }
  [[nodiscard]] CMatrix derivative(double phi) const;
  [[nodiscard]] Eigen::Index dimension() const { return dimension_; }
  [[nodiscard]] const std::optional<Generator>& generator() const { return generator_; }

  /// The family phi -> rho(tau phi).
  [[nodiscard]] QuantumFamily scaled(double tau) const;

  /// Throws ModelError unless rho(phi) is Hermitian, unit-trace and has
  /// eigenvalues >= -1e-12.
  void check_state(double phi) const;

private:
  StateFn state_;
  StateFn derivative_;
  std::optional<Generator> generator_;
  Eigen::Index dimension_ = 0;
};

/// Finite POVM {Pi_k}. The constructor enforces positivity (1e-12) and
/// completeness (||sum Pi - I|| <= 1e-10).
class Povm {
public:
  explicit Povm(std::vector<CMatrix> effects);

  /// Projectors onto the columns of a unitary.
  static Povm projective(const CMatrix& basis);
  /// Spectral projectors of a Hermitian operator (degenerate eigenvalues
  /// split along the eigensolver's basis).
  static Povm spectral(const CMatrix& hermitian);
  static Povm trivial(Eigen::Index dimension);

  [[nodiscard]] const std::vector<CMatrix>& effects() const { return effects_; }
  [[nodiscard]] std::size_t size() const { return effects_.size(); }

private:
  std::vector<CMatrix> effects_;
};

/// POVM whose effects are rank one, w_k w_k^dag, stored as the columns of W.
/// Cheaper than Povm for large dimensions. The constructor enforces
/// ||W W^dag - I|| <= 1e-10.
class RankOnePovm {
public:
  explicit RankOnePovm(CMatrix vectors);

  [[nodiscard]] const CMatrix& vectors() const { return w_; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(w_.cols()); }
  [[nodiscard]] Povm to_povm() const;

private:
  CMatrix w_;
};

/// Symmetric logarithmic derivative X with {X, rho}/2 = d rho/d phi. The block
/// on the kernel of rho is set to zero.
CMatrix sld(const QuantumFamily& family, double phi);

/// tr(rho X^2).
double qfi(const QuantumFamily& family, double phi);

/// 4 (tr(H^2 P) - tr(H P)^2) for a pure state P.
double qfi_hamiltonian(const CMatrix& H, const CMatrix& P);
/// Same, for a generator family (includes the factor rate^2).
double qfi_hamiltonian(const QuantumFamily& family);

/// Fisher information of phi -> rho(tau phi) at phi, i.e. tau^2 F(tau phi).
double qfi_scaled(const QuantumFamily& family, double tau, double phi);

/// tr(Pi_k rho(phi)) for each effect. Throws ModelError if they do not sum
/// to one within 1e-10.
std::vector<double> outcome_probabilities(const QuantumFamily& family, const Povm& povm, double phi);

/// sum_k tr(Pi_k d rho)^2 / tr(Pi_k rho) over effects with tr(Pi_k rho) > 1e-14.
double classical_fisher_of_povm(const QuantumFamily& family, const Povm& povm, double phi);
double classical_fisher_of_povm(const QuantumFamily& family, const RankOnePovm& povm, double phi);
/// Same, from a state and its phi-derivative evaluated once.
double classical_fisher_of_povm(const CMatrix& rho, const CMatrix& drho, const RankOnePovm& povm);

/// Categorical draw of an effect index.
std::size_t sample_outcome(const QuantumFamily& family, const Povm& povm, double phi, Rng& rng);

/// Ramsey interrogation of a two-level reference: the state
/// exp(-i T w0 phi sz/2) |+><+| exp(+i ...) read out after the closing
/// pi/2 pulse, so outcome 0 ("excited") has probability
/// cos^2((T w0 phi + offset) / 2) and phi = 0 is deterministic when
/// offset = 0.
struct RamseyReference {
  QuantumFamily family;
  Povm povm;
  double T = 1.0;
  double omega0 = 1.0;
  double phase_offset = 0.0;

  [[nodiscard]] double excited_probability(double phi) const;
};

RamseyReference ramsey_family(double T, double omega0, double phase_offset = 0.0);

/// Pure Gaussian wavefunctions psi_phi(x) = (F/2pi)^(1/4) exp(-F (x - phi)^2 / 4)
/// read out by a position measurement. F0 = +infinity gives a noiseless
/// reference whose outcome equals phi.
class GaussianWavefunctionFamily {
public:
  explicit GaussianWavefunctionFamily(double F0);

  [[nodiscard]] double F0() const { return F0_; }
  [[nodiscard]] double amplitude(double x, double phi) const;
  /// |psi_phi(x)|^2.
  [[nodiscard]] double position_density(double x, double phi) const;
  double sample_position(double phi, Rng& rng) const;
  /// The classical outcome family induced by the position measurement.
  [[nodiscard]] estimation::OutcomeFamily position_measurement() const;
  /// Pure-state QFI 4(<dpsi|dpsi> - <psi|dpsi>^2) by quadrature over x.
  [[nodiscard]] double qfi(double phi) const;

private:
  double F0_;
};

/// Classical Fisher information of the position measurement on the
/// Gaussian family (quadrature over the induced outcome density).
double classical_fisher_of_position(const GaussianWavefunctionFamily& family, double phi);

// N-spin helpers. Qubit basis |0>, |1> with sigma_z = diag(1, -1).
CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
/// sum_i sigma_z^(i) on n spins (dimension 2^n).
CMatrix collective_sz(int n_spins);
/// Projector onto (|0...0> + |1...1>)/sqrt(2).
CMatrix ghz_projector(int n_spins);
/// Projector onto |+>^(tensor n).
CMatrix product_plus_projector(int n_spins);
CMatrix projector(const CVector& v);

/// Random rank-one POVM with `n_effects` >= dimension elements:
/// Pi_k = S^(-1/2) v_k v_k^dag S^(-1/2) with S = sum v_k v_k^dag.
RankOnePovm random_rank1_povm(Eigen::Index dimension, std::size_t n_effects, Rng& rng);

} // namespace aclock::quantum
