#include "spin_operators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace purcell {

bool is_half_integer(double j) {
  if (!std::isfinite(j) || j < 0.0) return false;
  const double twice = 2.0 * j;
  return std::abs(twice - std::round(twice)) < 1e-9;
}

SpinOperatorSet angular_momentum_operators(double j) {
  if (!is_half_integer(j)) {
    throw std::invalid_argument("angular_momentum_operators: j must be a non-negative half-integer, got " +
                                std::to_string(j));
  }
  const int dim = static_cast<int>(std::lround(2.0 * j)) + 1;

  SpinOperatorSet ops;
  ops.j = j;
  ops.jz = Matrix::Zero(dim, dim);
  Matrix jplus = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double m = j - k;
    ops.jz(k, k) = m;
    if (k > 0) {
      // <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)) with m = j - k
      jplus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
  }
  const Matrix jminus = jplus.adjoint();
  ops.jx = 0.5 * (jplus + jminus);
  ops.jy = std::complex<double>(0.0, -0.5) * (jplus - jminus);
  return ops;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  Matrix out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index k = 0; k < ca; ++k) out.block(i * rb, k * cb, rb, cb) = a(i, k) * b;
  return out;
}

}  // namespace purcell
