#pragma once

#include <array>

#include "spin_operators.hpp"

namespace purcell {

using FieldVector = std::array<double, 3>;

/// Quantum numbers and coupling constants of the electro-nuclear spin
/// Hamiltonian  H/h = B.(gamma_e S x 1 - gamma_n 1 x I) + A S.I,
/// everything in ordinary-frequency units (Hz, Hz/T).
struct SpinSystem {
  double S = 0.5;
  double I = 4.5;
  double A_Hz = 1.4752e9;
  double gamma_e_Hz_per_T = 27.997e9;
  double gamma_n_Hz_per_T = 6.9e6;

  int dimension() const;
  void validate() const;  // throws std::invalid_argument
};

/// Si:Bi donor defaults (electron spin 1/2 bound to the I = 9/2 nucleus).
SpinSystem bismuth_donor();

/// Eigenstate tag by total angular momentum F and its projection mF.
struct StateLabel {
  double F = 0.0;
  double mF = 0.0;

  friend bool operator==(const StateLabel& a, const StateLabel& b) {
    return a.F == b.F && a.mF == b.mF;
  }
};

/// Hamiltonian over the product basis |S mS> x |I mI>, in Hz. Hermitian by
/// construction; throws on non-finite field components.
Matrix build_hamiltonian(const SpinSystem& system, const FieldVector& field_T);

}  // namespace purcell
