#include "jacobi.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace purcell {

namespace {

double offdiagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index p = 0; p < a.rows(); ++p)
    for (Eigen::Index q = p + 1; q < a.cols(); ++q) sum += 2.0 * std::norm(a(p, q));
  return std::sqrt(sum);
}

}  // namespace

EigenDecomposition jacobi_eigensolve(const Matrix& h, double tol, int max_sweeps) {
  const Eigen::Index n = h.rows();
  if (n == 0 || h.cols() != n) throw std::invalid_argument("jacobi_eigensolve: matrix must be square and non-empty");
  if (!h.allFinite()) throw std::invalid_argument("jacobi_eigensolve: non-finite entries");
  const double scale = h.norm();
  if ((h - h.adjoint()).norm() > 1e-9 * (scale + 1.0)) {
    throw std::invalid_argument("jacobi_eigensolve: matrix is not Hermitian within tolerance");
  }

  Matrix a = 0.5 * (h + h.adjoint());
  Matrix v = Matrix::Identity(n, n);

  if (scale > 0.0) {
    int sweep = 0;
    while (offdiagonal_norm(a) > tol * scale) {
      if (sweep++ >= max_sweeps) {
        throw std::runtime_error("jacobi_eigensolve: no convergence after " + std::to_string(max_sweeps) +
                                 " sweeps (off-diagonal norm " + std::to_string(offdiagonal_norm(a)) + ")");
      }
      for (Eigen::Index p = 0; p < n - 1; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const std::complex<double> hpq = a(p, q);
          const double apq = std::abs(hpq);
          if (apq <= tol * scale * 1e-3) continue;

          // Phase rotation makes the (p,q) block real symmetric, then a
          // standard Givens rotation zeroes it.
          const std::complex<double> phase = hpq / apq;  // e^{i phi}
          const double alpha = a(p, p).real();
          const double beta = a(q, q).real();
          const double tau = (beta - alpha) / (2.0 * apq);
          const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          const std::complex<double> s_conj_phase = s * std::conj(phase);

          for (Eigen::Index k = 0; k < n; ++k) {
            if (k == p || k == q) continue;
            const std::complex<double> akp = a(k, p);
            const std::complex<double> akq = a(k, q);
            a(k, p) = c * akp - s_conj_phase * akq;
            a(k, q) = s * akp + (c * std::conj(phase)) * akq;
            a(p, k) = std::conj(a(k, p));
            a(q, k) = std::conj(a(k, q));
          }
          a(p, p) = alpha - t * apq;
          a(q, q) = beta + t * apq;
          a(p, q) = 0.0;
          a(q, p) = 0.0;

          for (Eigen::Index k = 0; k < n; ++k) {
            const std::complex<double> vkp = v(k, p);
            const std::complex<double> vkq = v(k, q);
            v(k, p) = c * vkp - s_conj_phase * vkq;
            v(k, q) = s * vkp + (c * std::conj(phase)) * vkq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&a](Eigen::Index i, Eigen::Index k) { return a(i, i).real() < a(k, k).real(); });

  EigenDecomposition out;
  out.energies.resize(n);
  out.states.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.energies(k) = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]).real();
    out.states.col(k) = v.col(order[static_cast<size_t>(k)]);
  }
  return out;
}

}  // namespace purcell
