#include "aclock/quantum.hpp"

#include "aclock/errors.hpp"
#include "aclock/numerics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace aclock::quantum {

namespace {

constexpr double kDerivativeStep = 1e-5;
constexpr double kDegeneracyTolerance = 1e-12;
constexpr double kSingularTolerance = 1e-8;
constexpr double kProbabilityFloor = 1e-14;
constexpr double kPositivityTolerance = 1e-12;
constexpr double kCompletenessTolerance = 1e-10;

const Complex kI{0.0, 1.0};

double real_trace_product(const CMatrix& a, const CMatrix& b) {
  // Re tr(A B) without forming the product.
  return (a.transpose().cwiseProduct(b)).sum().real();
}

} // namespace

QuantumFamily::QuantumFamily(StateFn state, StateFn derivative)
    : state_(std::move(state)), derivative_(std::move(derivative)) {
  if (!state_) {
    throw InputError("quantum family: state function is empty");
  }
  dimension_ = state_(0.0).rows();
}

QuantumFamily QuantumFamily::hamiltonian(const CMatrix& H, const CMatrix& rho0, double rate) {
  if (H.rows() != H.cols() || rho0.rows() != H.rows() || rho0.cols() != H.cols()) {
    throw InputError("hamiltonian family: H and rho0 must be square and of equal size");
  }
  if (!H.isApprox(H.adjoint(), 1e-12)) {
    throw InputError("hamiltonian family: H must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  const CMatrix V = es.eigenvectors();
  const Eigen::VectorXd e = es.eigenvalues();
  auto state = [V, e, rho0, rate](double phi) -> CMatrix {
    const CVector phases = (-kI * (phi * rate) * e.cast<Complex>()).array().exp();
    const CMatrix U = V * phases.asDiagonal() * V.adjoint();
    return U * rho0 * U.adjoint();
  };
  auto derivative = [state, H, rate](double phi) -> CMatrix {
    const CMatrix rho = state(phi);
    return -kI * rate * (H * rho - rho * H);
  };
  QuantumFamily f(state, derivative);
  f.generator_ = Generator{H, rho0, rate};
  f.check_state(0.0);
  return f;
}

CMatrix QuantumFamily::derivative(double phi) const {
  if (derivative_) {
    return derivative_(phi);
  }
  return (state_(phi + kDerivativeStep) - state_(phi - kDerivativeStep)) / (2.0 * kDerivativeStep);
}

QuantumFamily QuantumFamily::scaled(double tau) const {
  auto base = *this;
  auto state = [base, tau](double phi) { return base.state(tau * phi); };
  auto derivative = [base, tau](double phi) -> CMatrix { return tau * base.derivative(tau * phi); };
  QuantumFamily f(state, derivative);
  if (generator_) {
    f.generator_ = Generator{generator_->hamiltonian, generator_->initial, generator_->rate * tau};
  }
  return f;
}

void QuantumFamily::check_state(double phi) const {
  const CMatrix rho = state(phi);
  std::ostringstream msg;
  if (!rho.isApprox(rho.adjoint(), 1e-10)) {
    msg << "state at phi=" << phi << " is not Hermitian";
  } else if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-10) {
    msg << "state at phi=" << phi << " has trace " << rho.trace().real();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPositivityTolerance) {
      msg << "state at phi=" << phi << " has negative eigenvalue " << es.eigenvalues().minCoeff();
    }
  }
  if (!msg.str().empty()) {
    throw ModelError(msg.str());
  }
}

Povm::Povm(std::vector<CMatrix> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) {
    throw ModelError("POVM has no effects");
  }
  const Eigen::Index d = effects_.front().rows();
  CMatrix total = CMatrix::Zero(d, d);
  for (const auto& e : effects_) {
    if (e.rows() != d || e.cols() != d) {
      throw ModelError("POVM effects differ in dimension");
    }
    if (!e.isApprox(e.adjoint(), 1e-10) && (e - e.adjoint()).norm() > 1e-12) {
      throw ModelError("POVM effect is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(e, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPositivityTolerance) {
      throw ModelError("POVM effect is not positive semidefinite");
    }
    total += e;
  }
  const double defect = (total - CMatrix::Identity(d, d)).norm();
  if (defect > kCompletenessTolerance) {
    std::ostringstream msg;
    msg << "POVM effects do not sum to the identity (defect " << defect << ")";
    throw ModelError(msg.str());
  }
}

Povm Povm::projective(const CMatrix& basis) {
  std::vector<CMatrix> effects;
  effects.reserve(static_cast<std::size_t>(basis.cols()));
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    effects.push_back(projector(basis.col(k)));
  }
  return Povm(std::move(effects));
}

Povm Povm::spectral(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  return projective(es.eigenvectors());
}

Povm Povm::trivial(Eigen::Index dimension) {
  return Povm({CMatrix::Identity(dimension, dimension)});
}

RankOnePovm::RankOnePovm(CMatrix vectors) : w_(std::move(vectors)) {
  if (w_.cols() < 1) {
    throw ModelError("POVM has no effects");
  }
  const double defect = (w_ * w_.adjoint() - CMatrix::Identity(w_.rows(), w_.rows())).norm();
  if (defect > kCompletenessTolerance) {
    std::ostringstream msg;
    msg << "POVM effects do not sum to the identity (defect " << defect << ")";
    throw ModelError(msg.str());
  }
}

Povm RankOnePovm::to_povm() const {
  std::vector<CMatrix> effects;
  effects.reserve(size());
  for (Eigen::Index k = 0; k < w_.cols(); ++k) {
    effects.push_back(w_.col(k) * w_.col(k).adjoint());
  }
  return Povm(std::move(effects));
}

CMatrix sld(const QuantumFamily& family, double phi) {
  const CMatrix rho = family.state(phi);
  const CMatrix drho = family.derivative(phi);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  const CMatrix& U = es.eigenvectors();
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const CMatrix d = U.adjoint() * drho * U;
  CMatrix x = CMatrix::Zero(rho.rows(), rho.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double s = lambda(i) + lambda(j);
      if (s > kDegeneracyTolerance) {
        x(i, j) = 2.0 * d(i, j) / s;
      } else if (std::abs(d(i, j)) > kSingularTolerance) {
        std::ostringstream msg;
        msg << "SLD is singular at phi=" << phi << ": eigenvalue sum " << s
            << " with derivative element " << std::abs(d(i, j));
        throw NumericalError(msg.str());
      }
    }
  }
  return U * x * U.adjoint();
}

double qfi(const QuantumFamily& family, double phi) {
  const CMatrix rho = family.state(phi);
  const CMatrix x = sld(family, phi);
  return real_trace_product(rho, x * x);
}

double qfi_hamiltonian(const CMatrix& H, const CMatrix& P) {
  const double purity = real_trace_product(P, P);
  if (std::abs(purity - 1.0) > 1e-10) {
    throw InputError("qfi_hamiltonian: initial state must be pure");
  }
  const double mean = real_trace_product(H, P);
  const double second = real_trace_product(H * H, P);
  return 4.0 * (second - mean * mean);
}

double qfi_hamiltonian(const QuantumFamily& family) {
  const auto& g = family.generator();
  if (!g) {
    throw InputError("qfi_hamiltonian: family has no generator");
  }
  return g->rate * g->rate * qfi_hamiltonian(g->hamiltonian, g->initial);
}

double qfi_scaled(const QuantumFamily& family, double tau, double phi) {
  return qfi(family.scaled(tau), phi);
}

std::vector<double> outcome_probabilities(const QuantumFamily& family, const Povm& povm, double phi) {
  const CMatrix rho = family.state(phi);
  std::vector<double> p;
  p.reserve(povm.size());
  double total = 0.0;
  for (const auto& e : povm.effects()) {
    p.push_back(real_trace_product(e, rho));
    total += p.back();
  }
  if (std::abs(total - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "outcome probabilities sum to " << total << " at phi=" << phi;
    throw ModelError(msg.str());
  }
  return p;
}

double classical_fisher_of_povm(const QuantumFamily& family, const Povm& povm, double phi) {
  const CMatrix rho = family.state(phi);
  const CMatrix drho = family.derivative(phi);
  double f = 0.0;
  for (const auto& e : povm.effects()) {
    const double p = real_trace_product(e, rho);
    if (p > kProbabilityFloor) {
      const double dp = real_trace_product(e, drho);
      f += dp * dp / p;
    }
  }
  return f;
}

double classical_fisher_of_povm(const QuantumFamily& family, const RankOnePovm& povm, double phi) {
  return classical_fisher_of_povm(family.state(phi), family.derivative(phi), povm);
}

double classical_fisher_of_povm(const CMatrix& rho, const CMatrix& drho, const RankOnePovm& povm) {
  const CMatrix& w = povm.vectors();
  const CMatrix rw = rho * w;
  const CMatrix dw = drho * w;
  double f = 0.0;
  for (Eigen::Index k = 0; k < w.cols(); ++k) {
    const double p = w.col(k).dot(rw.col(k)).real();
    if (p > kProbabilityFloor) {
      const double dp = w.col(k).dot(dw.col(k)).real();
      f += dp * dp / p;
    }
  }
  return f;
}

std::size_t sample_outcome(const QuantumFamily& family, const Povm& povm, double phi, Rng& rng) {
  const auto p = outcome_probabilities(family, povm, phi);
  const double u = rng.uniform();
  double c = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    c += std::max(0.0, p[k]);
    if (u < c) {
      return k;
    }
  }
  // u fell in the rounding gap above the last cumulative value.
  for (std::size_t k = p.size(); k-- > 0;) {
    if (p[k] > 0.0) {
      return k;
    }
  }
  return p.size() - 1;
}

double RamseyReference::excited_probability(double phi) const {
  const double c = std::cos((T * omega0 * phi + phase_offset) / 2.0);
  return c * c;
}

RamseyReference ramsey_family(double T, double omega0, double phase_offset) {
  if (!(T > 0.0) || !(omega0 > 0.0)) {
    throw InputError("ramsey_family: T and omega0 must be positive");
  }
  const CMatrix H = 0.5 * pauli_z();
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CVector minus(2);
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  CVector start(2);
  start << std::exp(-kI * phase_offset / 2.0) / std::sqrt(2.0),
      std::exp(kI * phase_offset / 2.0) / std::sqrt(2.0);
  CMatrix basis(2, 2);
  basis.col(0) = plus;
  basis.col(1) = minus;
  return RamseyReference{QuantumFamily::hamiltonian(H, projector(start), T * omega0),
                         Povm::projective(basis), T, omega0, phase_offset};
}

GaussianWavefunctionFamily::GaussianWavefunctionFamily(double F0) : F0_(F0) {
  if (!(F0 > 0.0)) {
    throw InputError("Gaussian wavefunction family: F0 must be positive");
  }
}

double GaussianWavefunctionFamily::amplitude(double x, double phi) const {
  const double d = x - phi;
  return std::pow(F0_ / (2.0 * std::numbers::pi), 0.25) * std::exp(-F0_ * d * d / 4.0);
}

double GaussianWavefunctionFamily::position_density(double x, double phi) const {
  const double a = amplitude(x, phi);
  return a * a;
}

double GaussianWavefunctionFamily::sample_position(double phi, Rng& rng) const {
  const double z = rng.normal();
  if (std::isinf(F0_)) {
    return phi;
  }
  return phi + z / std::sqrt(F0_);
}

estimation::OutcomeFamily GaussianWavefunctionFamily::position_measurement() const {
  if (std::isinf(F0_)) {
    throw InputError("position measurement of a noiseless reference has no density");
  }
  const GaussianWavefunctionFamily self = *this;
  estimation::OutcomeFamily f;
  f.density = [self](double x, double phi) { return self.position_density(x, phi); };
  f.sample = [self](double phi, Rng& rng) { return self.sample_position(phi, rng); };
  f.locate = [self](double phi) { return std::pair<double, double>{phi, 1.0 / std::sqrt(self.F0())}; };
  return f;
}

double GaussianWavefunctionFamily::qfi(double phi) const {
  if (std::isinf(F0_)) {
    return F0_;
  }
  // d psi / d phi = (F/2)(x - phi) psi for this real wavefunction.
  const auto dpsi = [&](double x) { return 0.5 * F0_ * (x - phi) * amplitude(x, phi); };
  const double scale = 1.0 / std::sqrt(F0_);
  const double norm2 = numerics::integrate_line(
      [&](double x) { return dpsi(x) * dpsi(x); }, phi, scale, numerics::kQuadratureTolerance,
      "wavefunction derivative norm");
  const double overlap = numerics::integrate_line(
      [&](double x) { return amplitude(x, phi) * dpsi(x); }, phi, scale,
      numerics::kQuadratureTolerance, "wavefunction overlap");
  return 4.0 * (norm2 - overlap * overlap);
}

double classical_fisher_of_position(const GaussianWavefunctionFamily& family, double phi) {
  return estimation::fisher_information(family.position_measurement(), phi);
}

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

namespace {
Eigen::Index spin_dimension(int n_spins) {
  if (n_spins < 1 || n_spins > 12) {
    throw InputError("spin systems support 1..12 spins");
  }
  return Eigen::Index{1} << n_spins;
}
} // namespace

CMatrix collective_sz(int n_spins) {
  const Eigen::Index d = spin_dimension(n_spins);
  CMatrix h = CMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    // Bit value 0 is sigma_z = +1, bit value 1 is -1.
    int ones = 0;
    for (int s = 0; s < n_spins; ++s) {
      ones += static_cast<int>((k >> s) & 1);
    }
    h(k, k) = static_cast<double>(n_spins - 2 * ones);
  }
  return h;
}

CMatrix ghz_projector(int n_spins) {
  const Eigen::Index d = spin_dimension(n_spins);
  CVector v = CVector::Zero(d);
  v(0) = 1.0 / std::sqrt(2.0);
  v(d - 1) = 1.0 / std::sqrt(2.0);
  return projector(v);
}

CMatrix product_plus_projector(int n_spins) {
  const Eigen::Index d = spin_dimension(n_spins);
  const CVector v = CVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  return projector(v);
}

CMatrix projector(const CVector& v) {
  const CVector u = v / v.norm();
  return u * u.adjoint();
}

RankOnePovm random_rank1_povm(Eigen::Index dimension, std::size_t n_effects, Rng& rng) {
  if (n_effects < static_cast<std::size_t>(dimension)) {
    throw InputError("random_rank1_povm: need at least `dimension` effects");
  }
  CMatrix v(dimension, static_cast<Eigen::Index>(n_effects));
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    for (Eigen::Index i = 0; i < dimension; ++i) {
      v(i, k) = Complex(rng.normal(), rng.normal());
    }
  }
  const CMatrix s = v * v.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
  return RankOnePovm(es.operatorInverseSqrt() * v);
}

} // namespace aclock::quantum
