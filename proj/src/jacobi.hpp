#pragma once

#include "spin_operators.hpp"

namespace purcell {

struct EigenDecomposition {
  Vector energies;  // ascending
  Matrix states;    // unitary, column k pairs with energies(k)
};

/// Cyclic Jacobi diagonalization of a complex Hermitian matrix. Sweeps run
/// until the off-diagonal Frobenius norm falls below tol * ||H||_F; throws
/// std::runtime_error with the residual norm if max_sweeps is exhausted and
/// std::invalid_argument when the input is not Hermitian.
EigenDecomposition jacobi_eigensolve(const Matrix& h, double tol = 1e-13, int max_sweeps = 60);

}  // namespace purcell
