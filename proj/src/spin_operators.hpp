#pragma once

#include <Eigen/Core>
#include <complex>

namespace purcell {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

/// True when 2j is a non-negative integer (within floating-point slack).
bool is_half_integer(double j);

/// Angular momentum matrices for a single spin j in units of hbar = 1.
/// Basis ordering is m = j, j-1, ..., -j, so jz is real diagonal with
/// entries j ... -j and the ladder operators carry the standard
/// sqrt(j(j+1) - m(m+-1)) amplitudes.
struct SpinOperatorSet {
  double j = 0.0;
  Matrix jx, jy, jz;

  int dim() const { return static_cast<int>(jz.rows()); }
};

/// Builds jx, jy, jz for the given half-integer j. Rejects negative or
/// non-half-integer j.
SpinOperatorSet angular_momentum_operators(double j);

/// Kronecker product, row-major convention: (a x b)((i*rb+k),(j*cb+l)) = a(i,j) b(k,l).
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace purcell
