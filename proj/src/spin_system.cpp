#include "spin_system.hpp"

#include <cmath>
#include <stdexcept>

namespace purcell {

int SpinSystem::dimension() const {
  return (static_cast<int>(std::lround(2.0 * S)) + 1) * (static_cast<int>(std::lround(2.0 * I)) + 1);
}

void SpinSystem::validate() const {
  if (!is_half_integer(S) || !is_half_integer(I)) {
    throw std::invalid_argument("SpinSystem: S and I must be non-negative half-integers");
  }
  if (!std::isfinite(A_Hz) || !std::isfinite(gamma_e_Hz_per_T) || !std::isfinite(gamma_n_Hz_per_T)) {
    throw std::invalid_argument("SpinSystem: couplings must be finite");
  }
  if (gamma_e_Hz_per_T <= 0.0) {
    throw std::invalid_argument("SpinSystem: gamma_e must be positive");
  }
}

SpinSystem bismuth_donor() { return SpinSystem{}; }

Matrix build_hamiltonian(const SpinSystem& system, const FieldVector& field_T) {
  system.validate();
  for (double b : field_T) {
    if (!std::isfinite(b)) throw std::invalid_argument("build_hamiltonian: non-finite field component");
  }

  const SpinOperatorSet s = angular_momentum_operators(system.S);
  const SpinOperatorSet i = angular_momentum_operators(system.I);
  const Matrix eye_s = Matrix::Identity(s.dim(), s.dim());
  const Matrix eye_i = Matrix::Identity(i.dim(), i.dim());

  const Matrix zeeman_e = field_T[0] * s.jx + field_T[1] * s.jy + field_T[2] * s.jz;
  const Matrix zeeman_n = field_T[0] * i.jx + field_T[1] * i.jy + field_T[2] * i.jz;

  Matrix h = system.gamma_e_Hz_per_T * kron(zeeman_e, eye_i);
  h -= system.gamma_n_Hz_per_T * kron(eye_s, zeeman_n);
  h += system.A_Hz * (kron(s.jx, i.jx) + kron(s.jy, i.jy) + kron(s.jz, i.jz));
  return h;
}

}  // namespace purcell
